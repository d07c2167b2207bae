#include <cmath>
#include <string>

#include "imml/ad/tensor.hpp"

namespace imml::ad {

namespace {

using Grad = std::vector<double>;
using Backward = std::function<void(const Grad&)>;

std::string shape_str(const Tensor& t) { return std::to_string(t.rows()) + "x" + std::to_string(t.cols()); }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeMismatch(std::string(op) + ": " + shape_str(a) + " vs " + shape_str(b));
}

// Records the result on the tape shared by the grad-tracking inputs, or
// returns a constant when nothing needs a gradient.
Tensor finish(std::size_t rows, std::size_t cols, Grad out, std::initializer_list<Tensor> inputs, Backward bw) {
    Tape* tape = nullptr;
    std::vector<std::shared_ptr<detail::Node>> parents;
    // Constant inputs are kept alive too; backward closures read their data.
    for (const auto& t : inputs) {
        parents.push_back(t.node());
        if (!t.requires_grad()) continue;
        if (tape && t.tape() != tape) throw TapeError("inputs recorded on different tapes");
        tape = t.tape();
    }
    if (!tape) return Tensor::constant(rows, cols, std::move(out));
    return tape->record({rows, cols}, std::move(out), std::move(parents), std::move(bw));
}

// Node pointer that only receives gradient when the input tracks one.
detail::Node* sink(const Tensor& t) { return t.requires_grad() ? t.node().get() : nullptr; }

double row_norm(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += x[k] * x[k];
    return std::sqrt(s);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("matmul: " + shape_str(a) + " by " + shape_str(b));
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Grad out(n * m, 0.0);
    const auto& A = a.data();
    const auto& B = b.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double v = A[i * k + p];
            for (std::size_t j = 0; j < m; ++j) out[i * m + j] += v * B[p * m + j];
        }
    auto* sa = sink(a);
    auto* sb = sink(b);
    const detail::Node* an = a.node().get();
    const detail::Node* bn = b.node().get();
    return finish(n, m, std::move(out), {a, b}, [=](const Grad& g) {
        if (sa)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < m; ++j) s += g[i * m + j] * bn->data[p * m + j];
                    sa->accumulate(i * k + p, s);
                }
        if (sb)
            for (std::size_t p = 0; p < k; ++p)
                for (std::size_t j = 0; j < m; ++j) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += an->data[i * k + p] * g[i * m + j];
                    sb->accumulate(p * m + j, s);
                }
    });
}

Tensor transpose(const Tensor& a) {
    const std::size_t r = a.rows(), c = a.cols();
    Grad out(r * c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a.data()[i * c + j];
    auto* sa = sink(a);
    return finish(c, r, std::move(out), {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) sa->accumulate(i * c + j, g[j * r + i]);
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    Grad out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    auto* sa = sink(a);
    auto* sb = sink(b);
    return finish(a.rows(), a.cols(), std::move(out), {a, b}, [=](const Grad& g) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (sa) sa->accumulate(i, g[i]);
            if (sb) sb->accumulate(i, g[i]);
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    Grad out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    auto* sa = sink(a);
    auto* sb = sink(b);
    return finish(a.rows(), a.cols(), std::move(out), {a, b}, [=](const Grad& g) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (sa) sa->accumulate(i, g[i]);
            if (sb) sb->accumulate(i, -g[i]);
        }
    });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != a.cols())
        throw ShapeMismatch("add_bias: " + shape_str(a) + " with bias " + shape_str(bias));
    const std::size_t r = a.rows(), c = a.cols();
    Grad out(a.data());
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bias.data()[j];
    auto* sa = sink(a);
    auto* sb = sink(bias);
    return finish(r, c, std::move(out), {a, bias}, [=](const Grad& g) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) {
                if (sa) sa->accumulate(i * c + j, g[i * c + j]);
                if (sb) sb->accumulate(j, g[i * c + j]);
            }
    });
}

Tensor scale(const Tensor& a, double s) {
    Grad out(a.data());
    for (auto& v : out) v *= s;
    auto* sa = sink(a);
    return finish(a.rows(), a.cols(), std::move(out), {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < g.size(); ++i) sa->accumulate(i, s * g[i]);
    });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape("hadamard", a, b);
    Grad out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    auto* sa = sink(a);
    auto* sb = sink(b);
    const detail::Node* an = a.node().get();
    const detail::Node* bn = b.node().get();
    return finish(a.rows(), a.cols(), std::move(out), {a, b}, [=](const Grad& g) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (sa) sa->accumulate(i, g[i] * bn->data[i]);
            if (sb) sb->accumulate(i, g[i] * an->data[i]);
        }
    });
}

Tensor div(const Tensor& a, const Tensor& b) {
    require_same_shape("div", a, b);
    Grad out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (b.data()[i] == 0.0) throw NonFiniteValue("div: zero divisor");
        out[i] = a.data()[i] / b.data()[i];
    }
    auto* sa = sink(a);
    auto* sb = sink(b);
    const detail::Node* an = a.node().get();
    const detail::Node* bn = b.node().get();
    return finish(a.rows(), a.cols(), std::move(out), {a, b}, [=](const Grad& g) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double q = bn->data[i];
            if (sa) sa->accumulate(i, g[i] / q);
            if (sb) sb->accumulate(i, -g[i] * an->data[i] / (q * q));
        }
    });
}

Tensor scale_rows(const Tensor& a, const std::vector<double>& s) {
    if (s.size() != a.rows())
        throw ShapeMismatch("scale_rows: " + std::to_string(s.size()) + " factors for " + shape_str(a));
    const std::size_t r = a.rows(), c = a.cols();
    Grad out(a.data());
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] *= s[i];
    auto* sa = sink(a);
    return finish(r, c, std::move(out), {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) sa->accumulate(i * c + j, s[i] * g[i * c + j]);
    });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("concat_cols: " + shape_str(a) + " and " + shape_str(b));
    const std::size_t r = a.rows(), ca = a.cols(), cb = b.cols(), c = ca + cb;
    Grad out(r * c);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < ca; ++j) out[i * c + j] = a.data()[i * ca + j];
        for (std::size_t j = 0; j < cb; ++j) out[i * c + ca + j] = b.data()[i * cb + j];
    }
    auto* sa = sink(a);
    auto* sb = sink(b);
    return finish(r, c, std::move(out), {a, b}, [=](const Grad& g) {
        for (std::size_t i = 0; i < r; ++i) {
            if (sa)
                for (std::size_t j = 0; j < ca; ++j) sa->accumulate(i * ca + j, g[i * c + j]);
            if (sb)
                for (std::size_t j = 0; j < cb; ++j) sb->accumulate(i * cb + j, g[i * c + ca + j]);
        }
    });
}

Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& rows) {
    const std::size_t c = a.cols();
    Grad out(rows.size() * c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= a.rows())
            throw ShapeMismatch("gather_rows: row " + std::to_string(rows[i]) + " of " + shape_str(a));
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = a.data()[rows[i] * c + j];
    }
    auto* sa = sink(a);
    return finish(rows.size(), c, std::move(out), {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < c; ++j) sa->accumulate(rows[i] * c + j, g[i * c + j]);
    });
}

Tensor tanh(const Tensor& a) {
    Grad out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a.data()[i]);
    auto* sa = sink(a);
    Grad y = out;
    return finish(a.rows(), a.cols(), std::move(out), {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < g.size(); ++i) sa->accumulate(i, g[i] * (1.0 - y[i] * y[i]));
    });
}

Tensor exp(const Tensor& a) {
    Grad out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(a.data()[i]);
    auto* sa = sink(a);
    Grad y = out;
    return finish(a.rows(), a.cols(), std::move(out), {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < g.size(); ++i) sa->accumulate(i, g[i] * y[i]);
    });
}

Tensor log(const Tensor& a) {
    Grad out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = a.data()[i];
        if (!(v > 0.0)) throw NonFiniteValue("log of non-positive value " + std::to_string(v));
        out[i] = std::log(v);
    }
    auto* sa = sink(a);
    const detail::Node* an = a.node().get();
    return finish(a.rows(), a.cols(), std::move(out), {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < g.size(); ++i) sa->accumulate(i, g[i] / an->data[i]);
    });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data()) s += v;
    auto* sa = sink(a);
    const std::size_t n = a.size();
    return finish(1, 1, {s}, {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < n; ++i) sa->accumulate(i, g[0]);
    });
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw ShapeMismatch("mean of an empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor row_sum(const Tensor& a) {
    const std::size_t r = a.rows(), c = a.cols();
    Grad out(r, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i] += a.data()[i * c + j];
    auto* sa = sink(a);
    return finish(r, 1, std::move(out), {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) sa->accumulate(i * c + j, g[i]);
    });
}

Tensor l2_normalize(const Tensor& a) {
    const std::size_t r = a.rows(), c = a.cols();
    Grad out(a.size());
    Grad denom(r);
    for (std::size_t i = 0; i < r; ++i) {
        const double* x = a.data().data() + i * c;
        const double norm = row_norm(x, c);
        if (norm <= kNormEpsilon) throw DegenerateNorm("l2_normalize: row " + std::to_string(i) + " has zero norm");
        denom[i] = std::sqrt(norm * norm + kNormEpsilon);
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[j] / denom[i];
    }
    auto* sa = sink(a);
    const detail::Node* an = a.node().get();
    return finish(r, c, std::move(out), {a}, [=](const Grad& g) {
        // d(x/n)/dx = I/n - x x^T / n^3
        for (std::size_t i = 0; i < r; ++i) {
            const double* x = an->data.data() + i * c;
            double xg = 0.0;
            for (std::size_t j = 0; j < c; ++j) xg += x[j] * g[i * c + j];
            const double n = denom[i], n3 = n * n * n;
            for (std::size_t j = 0; j < c; ++j) sa->accumulate(i * c + j, g[i * c + j] / n - x[j] * xg / n3);
        }
    });
}

Tensor cosine(const Tensor& a, const Tensor& b) {
    require_same_shape("cosine", a, b);
    const std::size_t r = a.rows(), c = a.cols();
    Grad out(r), na(r), nb(r);
    for (std::size_t i = 0; i < r; ++i) {
        const double* x = a.data().data() + i * c;
        const double* y = b.data().data() + i * c;
        na[i] = row_norm(x, c);
        nb[i] = row_norm(y, c);
        if (na[i] <= kNormEpsilon || nb[i] <= kNormEpsilon)
            throw DegenerateNorm("cosine: row " + std::to_string(i) + " has zero norm");
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += x[j] * y[j];
        out[i] = dot / (na[i] * nb[i]);
    }
    auto* sa = sink(a);
    auto* sb = sink(b);
    const detail::Node* an = a.node().get();
    const detail::Node* bn = b.node().get();
    Grad cs = out;
    return finish(r, 1, std::move(out), {a, b}, [=](const Grad& g) {
        for (std::size_t i = 0; i < r; ++i) {
            const double* x = an->data.data() + i * c;
            const double* y = bn->data.data() + i * c;
            const double ab = na[i] * nb[i];
            for (std::size_t j = 0; j < c; ++j) {
                if (sa) sa->accumulate(i * c + j, g[i] * (y[j] / ab - cs[i] * x[j] / (na[i] * na[i])));
                if (sb) sb->accumulate(i * c + j, g[i] * (x[j] / ab - cs[i] * y[j] / (nb[i] * nb[i])));
            }
        }
    });
}

Tensor softmax(const Tensor& a) {
    const std::size_t r = a.rows(), c = a.cols();
    Grad out(a.size());
    for (std::size_t i = 0; i < r; ++i) {
        const double* x = a.data().data() + i * c;
        double mx = x[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, x[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += (out[i * c + j] = std::exp(x[j] - mx));
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= s;
    }
    auto* sa = sink(a);
    Grad y = out;
    return finish(r, c, std::move(out), {a}, [=](const Grad& g) {
        for (std::size_t i = 0; i < r; ++i) {
            double gy = 0.0;
            for (std::size_t j = 0; j < c; ++j) gy += g[i * c + j] * y[i * c + j];
            for (std::size_t j = 0; j < c; ++j) sa->accumulate(i * c + j, y[i * c + j] * (g[i * c + j] - gy));
        }
    });
}

Tensor softmax_xent(const Tensor& logits, const Tensor& targets) {
    require_same_shape("softmax_xent", logits, targets);
    const std::size_t r = logits.rows(), c = logits.cols();
    Grad p(logits.size());
    Grad mass(r, 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        const double* z = logits.data().data() + i * c;
        const double* t = targets.data().data() + i * c;
        double mx = z[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, z[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += std::exp(z[j] - mx);
        const double lse = mx + std::log(s);
        for (std::size_t j = 0; j < c; ++j) {
            p[i * c + j] = std::exp(z[j] - lse);
            mass[i] += t[j];
            loss -= t[j] * (z[j] - lse);
        }
    }
    auto* sl = sink(logits);
    Grad t = targets.data();
    return finish(1, 1, {loss}, {logits}, [=](const Grad& g) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) sl->accumulate(i * c + j, g[0] * (p[i * c + j] * mass[i] - t[i * c + j]));
    });
}

Tensor mse(const Tensor& pred, const Tensor& target) {
    require_same_shape("mse", pred, target);
    const std::size_t c = pred.cols();
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - target.data()[i];
        loss += d * d / static_cast<double>(c);
    }
    auto* sp = sink(pred);
    const detail::Node* pn = pred.node().get();
    Grad t = target.data();
    return finish(1, 1, {loss}, {pred}, [=](const Grad& g) {
        for (std::size_t i = 0; i < pn->data.size(); ++i)
            sp->accumulate(i, g[0] * 2.0 * (pn->data[i] - t[i]) / static_cast<double>(c));
    });
}

}  // namespace imml::ad
