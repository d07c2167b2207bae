#include "imml/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace imml::harness {

using namespace imml::ad;
namespace ls = imml::losses;

namespace {

constexpr std::uint64_t kBetaStream = 0xd1b54a32d192ed03ULL;

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10f", v);
    return buf;
}

std::vector<double> keep_mask(std::size_t width, double ratio, std::mt19937_64& rng) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("mask ratio must lie in [0, 1]");
    std::vector<std::size_t> order(width);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto dropped = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(width)));
    std::vector<double> keep(width, 1.0);
    for (std::size_t j = 0; j < dropped; ++j) keep[order[j]] = 0.0;
    return keep;
}

}  // namespace

BatchObjective batch_objective(const Model& m, const Split& batch, std::size_t classes, const ls::LossConfig& cfg,
                               std::mt19937_64& rng) {
    const auto labels = one_hot_rows(batch.y, classes);
    const Forward f = forward(m, batch.x_p, batch.x_a);
    BatchObjective out;
    out.base = softmax_xent(f.logits, ls::label_matrix(labels));
    out.mdke = cfg.gamma1 != 0.0 ? ls::mdke_loss({f.projected[0], f.projected[1]}, cfg) : Tensor::scalar(0.0);
    if (cfg.gamma2 != 0.0) {
        const ls::Predictor head = [&](const Tensor& z) { return classify_fused(m, z, f.phi); };
        out.beta = ls::beta_loss(f.gated[0], {f.gated[1]}, labels, head, cfg, ls::FusionSpec{}, rng);
    } else {
        out.beta = Tensor::scalar(0.0);
    }
    out.objective = scale(ls::imml_loss(out.mdke, out.beta, out.base, cfg), 1.0 / static_cast<double>(batch.size()));
    return out;
}

TrainResult train(Model model, const Dataset& data, const TrainConfig& cfg) {
    cfg.loss.validate();
    const std::size_t n = data.train.size();
    const std::size_t bs = std::min(cfg.batch_size, n);
    if (bs <= cfg.loss.n_unpaired)
        throw ls::BatchTooSmall("batch of " + std::to_string(bs) + " needs more than " +
                                std::to_string(cfg.loss.n_unpaired) + " samples");

    std::mt19937_64 shuffle_rng(cfg.seed), beta_rng(cfg.seed ^ kBetaStream);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        EpochMetrics em;
        em.epoch = epoch;
        const std::size_t batches = n / bs;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::vector<std::size_t> idx(order.begin() + b * bs, order.begin() + (b + 1) * bs);
            const Split batch = data.train.rows(idx);

            Tape tape;
            Model live = model;
            const auto slots = live.parameters();
            for (auto* p : slots) *p = tape.leaf(*p);
            BatchObjective obj;
            try {
                obj = batch_objective(live, batch, data.classes, cfg.loss, beta_rng);
            } catch (const NonFiniteValue& e) {
                throw NonFiniteLoss(std::string("epoch ") + std::to_string(epoch) + ": " + e.what());
            }
            const double value = obj.objective.item();
            if (!std::isfinite(value) || value > cfg.divergence_limit)
                throw NonFiniteLoss("epoch " + std::to_string(epoch) + ": objective " + std::to_string(value));
            tape.backward(obj.objective);

            const auto targets = model.parameters();
            for (std::size_t i = 0; i < slots.size(); ++i) {
                auto d = targets[i]->data();
                const auto g = slots[i]->grad();
                for (std::size_t j = 0; j < d.size(); ++j) d[j] -= cfg.lr * g[j];
                *targets[i] = Tensor::constant(targets[i]->rows(), targets[i]->cols(), std::move(d));
            }

            const double scale_n = 1.0 / static_cast<double>(bs);
            em.objective += value;
            em.mdke += obj.mdke.item() * scale_n;
            em.beta += obj.beta.item() * scale_n;
            em.base += obj.base.item() * scale_n;
        }
        if (batches > 0) {
            const double inv = 1.0 / static_cast<double>(batches);
            em.objective *= inv;
            em.mdke *= inv;
            em.beta *= inv;
            em.base *= inv;
        }
        em.train_accuracy = accuracy(forward(model, data.train.x_p, data.train.x_a).logits, data.train.y);
        if (data.val.size() > 0)
            em.val_accuracy = accuracy(forward(model, data.val.x_p, data.val.x_a).logits, data.val.y);
        result.log.push_back(em);
    }
    result.model = std::move(model);
    return result;
}

double evaluate(const Model& m, const Split& s, double mask_p, double mask_a, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    FeatureMask mask;
    mask.p = keep_mask(m.hidden(), mask_p, rng);
    mask.a = keep_mask(m.hidden(), mask_a, rng);
    return accuracy(forward(m, s.x_p, s.x_a, mask).logits, s.y);
}

std::vector<HeatmapCell> masking_sweep(const Model& m, const Split& s, const std::vector<double>& grid,
                                       std::uint64_t seed) {
    std::vector<HeatmapCell> out;
    for (double p : grid)
        for (double a : grid) out.push_back({p, a, evaluate(m, s, p, a, seed)});
    return out;
}

std::string metrics_csv(const std::vector<EpochMetrics>& log) {
    std::string out = "epoch,objective,mdke,beta,base,train_accuracy,val_accuracy\n";
    for (const auto& e : log)
        out += std::to_string(e.epoch) + "," + fixed(e.objective) + "," + fixed(e.mdke) + "," + fixed(e.beta) + "," +
               fixed(e.base) + "," + fixed(e.train_accuracy) + "," + fixed(e.val_accuracy) + "\n";
    return out;
}

std::string heatmap_csv(const std::vector<HeatmapCell>& cells) {
    std::string out = "mask_p,mask_a,accuracy\n";
    for (const auto& c : cells) out += fixed(c.mask_p) + "," + fixed(c.mask_a) + "," + fixed(c.accuracy) + "\n";
    return out;
}

}  // namespace imml::harness
