#include "imml/harness/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace imml::harness {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vectors differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

void record(InequalityReport& r, double lhs, double rhs) {
    const double slack = rhs - lhs;
    if (r.instances == 0 || slack < r.worst_slack || std::isnan(slack)) {
        r.worst_lhs = lhs;
        r.worst_rhs = rhs;
        r.worst_slack = slack;
    }
    ++r.instances;
    r.passed = r.worst_slack >= -kInequalityTolerance;
}

double cross_entropy(const std::vector<double>& z, std::size_t y) {
    const double top = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - top);
    return top + std::log(s) - z.at(y);
}

Rows to_rows(const Tensor& t) {
    Rows out(t.rows(), std::vector<double>(t.cols()));
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) out[i][j] = t.at(i, j);
    return out;
}

void require_rows(const Rows& f, const std::vector<std::size_t>& y) {
    if (f.size() != y.size()) throw std::invalid_argument("one label per feature row is required");
}

}  // namespace

Rows class_means(const Rows& features, const std::vector<std::size_t>& y, std::size_t classes) {
    require_rows(features, y);
    const std::size_t dim = features.empty() ? 0 : features[0].size();
    Rows mu(classes, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> count(classes, 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        ++count.at(y[i]);
        for (std::size_t j = 0; j < dim; ++j) mu[y[i]][j] += features[i][j];
    }
    for (std::size_t k = 0; k < classes; ++k)
        if (count[k] > 0)
            for (auto& v : mu[k]) v /= static_cast<double>(count[k]);
    return mu;
}

double conditional_deviation(const Rows& features, const std::vector<std::size_t>& y, std::size_t classes) {
    if (features.empty()) return 0.0;
    const Rows mu = class_means(features, y, classes);
    double s = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) s += dist2(features[i], mu[y[i]]);
    return std::sqrt(s / static_cast<double>(features.size()));
}

InequalityReport check_cauchy_schwarz_step(const Rows& anchors, const Rows& partners,
                                           const std::vector<std::size_t>& y, const Rows& means) {
    require_rows(anchors, y);
    require_rows(partners, y);
    InequalityReport r;
    r.label = "cauchy_schwarz";
    if (anchors.empty()) return r;
    double u_mu = 0.0, spread = 0.0, u_v = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const auto& mu = means.at(y[i]);
        u_mu += dot(anchors[i], mu);
        spread += dist2(partners[i], mu);
        u_v += dot(anchors[i], partners[i]);
    }
    const double n = static_cast<double>(anchors.size());
    record(r, -u_mu / n - std::sqrt(spread / n), -u_v / n);
    return r;
}

InequalityReport check_jensen_step(const Rows& features, const std::vector<std::size_t>& y, const Rows& means,
                                   const Rows& anchors) {
    require_rows(features, y);
    InequalityReport r;
    r.label = "jensen";
    for (std::size_t k = 0; k < means.size(); ++k) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == k) members.push_back(i);
        if (members.empty()) continue;
        for (const auto& a : anchors) {
            double e = 0.0;
            for (auto i : members) e += std::exp(dot(a, features[i]));
            record(r, std::exp(dot(a, means[k])), e / static_cast<double>(members.size()));
        }
    }
    return r;
}

InequalityReport check_jensen_step(const Rows& features, const std::vector<std::size_t>& y, const Rows& means) {
    return check_jensen_step(features, y, means, features);
}

InequalityReport check_convexity_step(const std::vector<Rows>& logits, const std::vector<double>& phi,
                                      const std::vector<std::size_t>& y) {
    if (logits.empty() || logits.size() != phi.size())
        throw std::invalid_argument("one fusion weight per modality is required");
    double total = 0.0;
    for (double w : phi) {
        if (!(w >= 0.0)) throw std::invalid_argument("fusion weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("fusion weights must sum to 1");
    for (const auto& z : logits) require_rows(z, y);

    InequalityReport r;
    r.label = "convexity";
    for (std::size_t i = 0; i < y.size(); ++i) {
        std::vector<double> fused(logits[0][i].size(), 0.0);
        double rhs = 0.0;
        for (std::size_t m = 0; m < logits.size(); ++m) {
            if (logits[m][i].size() != fused.size()) throw std::invalid_argument("logit widths differ");
            for (std::size_t k = 0; k < fused.size(); ++k) fused[k] += phi[m] * logits[m][i][k];
            rhs += phi[m] * cross_entropy(logits[m][i], y[i]);
        }
        record(r, cross_entropy(fused, y[i]), rhs);
    }
    return r;
}

EpsilonDecay estimate_epsilon(const Rows& anchors, const Rows& pool, const std::vector<std::size_t>& r_values,
                              std::size_t repetitions, std::mt19937_64& rng) {
    if (anchors.empty() || pool.empty() || repetitions == 0)
        throw std::invalid_argument("epsilon estimate needs anchors, a pool and repetitions");
    Rows e(anchors.size(), std::vector<double>(pool.size()));
    std::vector<double> log_e(anchors.size());
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        double s = 0.0;
        for (std::size_t j = 0; j < pool.size(); ++j) s += e[a][j] = std::exp(dot(anchors[a], pool[j]));
        log_e[a] = std::log(s / static_cast<double>(pool.size()));
    }

    EpsilonDecay out;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (auto r : r_values) {
        if (r == 0) throw std::invalid_argument("R must be positive");
        double err = 0.0;
        for (std::size_t a = 0; a < anchors.size(); ++a)
            for (std::size_t rep = 0; rep < repetitions; ++rep) {
                double s = 0.0;
                for (std::size_t j = 0; j < r; ++j) s += e[a][pick(rng)];
                err += std::abs(std::log(s / static_cast<double>(r)) - log_e[a]);
            }
        out.samples.emplace_back(r, err / static_cast<double>(anchors.size() * repetitions));
    }

    double mx = 0.0, my = 0.0;
    for (const auto& [r, eps] : out.samples) {
        mx += std::log(static_cast<double>(r));
        my += std::log(eps);
    }
    const double n = static_cast<double>(out.samples.size());
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [r, eps] : out.samples) {
        const double dx = std::log(static_cast<double>(r)) - mx;
        sxy += dx * (std::log(eps) - my);
        sxx += dx * dx;
    }
    out.slope = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
    return out;
}

bool BoundReport::passed() const {
    auto finite = [](double v) { return std::isfinite(v); };
    bool ok = finite(gerror) && finite(log_term) && epsilon.slope >= -0.7 && epsilon.slope <= -0.3;
    for (const auto& m : modalities) ok = ok && finite(m.mdke) && finite(m.deviation);
    for (const auto& s : step_checks) ok = ok && s.passed;
    return ok;
}

BoundReport bound_report(const Model& m, const Split& s, const losses::LossConfig& cfg, std::size_t batch_size,
                         std::uint64_t seed) {
    cfg.validate();
    const std::size_t n = s.size();
    const std::size_t bs = std::min(batch_size, n);
    if (bs < 2) throw std::invalid_argument("bound report needs batches of at least two samples");
    const std::size_t k = m.classes();

    const Forward f = forward(m, s.x_p, s.x_a);
    BoundReport rep;
    rep.phi = m.phi();
    rep.gerror = ad::softmax_xent(f.logits, losses::label_matrix(one_hot_rows(s.y, k))).item() / static_cast<double>(n);

    const std::array<Tensor, 2> unit = {ad::l2_normalize(f.projected[0]), ad::l2_normalize(f.projected[1])};
    const std::array<Rows, 2> rows = {to_rows(unit[0]), to_rows(unit[1])};
    const char* names[2] = {"P", "A"};
    for (std::size_t i = 0; i < 2; ++i) {
        ModalityBound mb;
        mb.name = names[i];
        double total = 0.0;
        const std::size_t batches = n / bs;
        for (std::size_t b = 0; b < batches; ++b) {
            std::vector<std::size_t> idx(bs);
            for (std::size_t j = 0; j < bs; ++j) idx[j] = b * bs + j;
            total += losses::mdke_pair_term(ad::gather_rows(unit[i], idx), ad::gather_rows(unit[1 - i], idx), cfg.tau)
                         .item();
        }
        mb.mdke = total / static_cast<double>(batches * bs);
        mb.deviation = conditional_deviation(rows[i], s.y, k);
        rep.modalities.push_back(mb);
    }
    rep.n_neg = 2 * (bs - 1);
    rep.log_term = std::log(static_cast<double>(rep.n_neg) / static_cast<double>(k));

    const std::size_t n_anchor = std::min<std::size_t>(32, n / 2);
    const Rows anchors(rows[0].begin(), rows[0].begin() + static_cast<std::ptrdiff_t>(n_anchor));
    const Rows pool(rows[0].begin() + static_cast<std::ptrdiff_t>(n_anchor), rows[0].end());
    std::mt19937_64 rng(seed);
    rep.epsilon = estimate_epsilon(anchors, pool, kEpsilonR, 200, rng);

    for (std::size_t i = 0; i < 2; ++i) {
        auto cs = check_cauchy_schwarz_step(rows[i], rows[1 - i], s.y, class_means(rows[1 - i], s.y, k));
        cs.label += std::string("/") + names[i];
        rep.step_checks.push_back(cs);
        auto js = check_jensen_step(rows[i], s.y, class_means(rows[i], s.y, k));
        js.label += std::string("/") + names[i];
        rep.step_checks.push_back(js);
    }
    const auto per = modality_logits(m, f);
    rep.step_checks.push_back(check_convexity_step({to_rows(per[0]), to_rows(per[1])}, rep.phi, s.y));
    return rep;
}

}  // namespace imml::harness
