#include "naive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

void for_each_sequence(int k, int n, const std::function<void(const Seq&)>& f) {
    Seq x(static_cast<std::size_t>(n), 0);
    while (true) {
        f(x);
        int i = n - 1;
        while (i >= 0 && x[i] == k - 1) x[i--] = 0;
        if (i < 0) return;
        ++x[i];
    }
}

std::vector<double> stationary_power(const ParamVector& theta) {
    const int k = theta.alphabet_size();
    if (theta.family().kind() == redlab::SourceKind::Memoryless) {
        auto p = theta.probs();
        return {p.begin(), p.end()};
    }
    std::vector<double> pi(k, 1.0 / k), next(k);
    for (int it = 0; it < 2'000'000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        // Lazy chain (I + P) / 2: same fixed point, no periodic oscillation.
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) next[j] += 0.5 * pi[i] * (theta.prob(i, j) + (i == j ? 1.0 : 0.0));
        double diff = 0.0;
        for (int j = 0; j < k; ++j) diff = std::max(diff, std::abs(next[j] - pi[j]));
        pi.swap(next);
        if (diff < 1e-16) break;
    }
    return pi;
}

namespace {

double prob_with_start(const ParamVector& theta, const std::vector<double>& start, const Seq& x) {
    if (x.empty()) return 1.0;
    const bool markov = theta.family().kind() == redlab::SourceKind::Markov1;
    double p = start[x[0]];
    for (std::size_t t = 1; t < x.size(); ++t) p *= theta.prob(markov ? x[t - 1] : 0, x[t]);
    return p;
}

}  // namespace

double prob(const ParamVector& theta, const Seq& x) { return prob_with_start(theta, stationary_power(theta), x); }

double entropy_enum(const ParamVector& theta, int n) {
    const auto start = stationary_power(theta);
    double h = 0.0;
    for_each_sequence(theta.alphabet_size(), n, [&](const Seq& x) {
        const double p = prob_with_start(theta, start, x);
        if (p > 0.0) h -= p * std::log2(p);
    });
    return h;
}

std::size_t ml_point(const std::vector<ParamVector>& points, const Seq& x) {
    std::size_t best = 0;
    double best_ll = -INFINITY;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double p = prob(points[i], x);
        const double ll = p > 0.0 ? std::log2(p) : -INFINITY;
        const bool better = std::isinf(best_ll) ? ll > best_ll : ll > best_ll + 1e-12 * std::max(1.0, std::abs(best_ll));
        if (i == 0 || better) {
            best_ll = ll;
            best = i;
        }
    }
    return best;
}

double two_stage_len(const std::vector<ParamVector>& points, int m, const Seq& x) {
    return m - std::log2(prob(points[ml_point(points, x)], x));
}

std::vector<double> cell_masses(const std::vector<ParamVector>& points, int n) {
    std::vector<double> a(points.size(), 0.0);
    for_each_sequence(points[0].alphabet_size(), n, [&](const Seq& x) {
        const auto g = ml_point(points, x);
        a[g] += prob(points[g], x);
    });
    return a;
}

double cond_two_stage_len(const std::vector<ParamVector>& points, const std::vector<double>& masses, int m,
                          const Seq& x) {
    const auto g = ml_point(points, x);
    return m + std::log2(masses[g]) - std::log2(prob(points[g], x));
}

double mixture_len(const ParamFamily& family, const Seq& x) {
    const int k = family.alphabet_size();
    const bool markov = family.kind() == redlab::SourceKind::Markov1;
    std::vector<std::vector<double>> counts(markov ? k : 1, std::vector<double>(k, 0.0));
    double bits = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (markov && t == 0) {
            bits += std::log2(static_cast<double>(k));
            continue;
        }
        auto& c = counts[markov ? x[t - 1] : 0];
        double total = 0.0;
        for (double v : c) total += v;
        bits -= std::log2((c[x[t]] + 0.5) / (total + 0.5 * k));
        c[x[t]] += 1.0;
    }
    return bits;
}

double expected_len(const ParamVector& theta, int n, const std::function<double(const Seq&)>& len) {
    const auto start = stationary_power(theta);
    double acc = 0.0;
    for_each_sequence(theta.alphabet_size(), n, [&](const Seq& x) {
        const double p = prob_with_start(theta, start, x);
        if (p > 0.0) acc += p * len(x);
    });
    return acc;
}

double kraft_sum(int k, int n, const std::function<double(const Seq&)>& len) {
    double s = 0.0;
    for_each_sequence(k, n, [&](const Seq& x) { s += std::exp2(-len(x)); });
    return s;
}

std::vector<std::vector<double>> fisher_fd(const ParamVector& theta, double h) {
    const auto& fam = theta.family();
    const int k = theta.alphabet_size();
    const int rows = fam.rows();
    const auto pi = stationary_power(theta);
    const auto base = theta.free_coordinates();
    const std::size_t d = base.size();
    // Step per coordinate: small against the two probabilities it moves
    // (its own entry and the row's reference entry), no smaller.
    std::vector<double> step(d);
    for (std::size_t a = 0; a < d; ++a) {
        const int r = static_cast<int>(a) / (k - 1);
        step[a] = std::min(h, 1e-3 * std::min(base[a], theta.prob(r, 0)));
    }

    // Expected conditional log-likelihood of the model at free coordinates
    // f, weights fixed at theta. Rows are rebuilt by hand.
    auto expected_ll = [&](const std::vector<double>& f) {
        double acc = 0.0;
        for (int r = 0; r < rows; ++r) {
            double rest = 1.0;
            for (int j = 1; j < k; ++j) rest -= f[r * (k - 1) + (j - 1)];
            const double w = rows == 1 ? 1.0 : pi[r];
            for (int j = 0; j < k; ++j) {
                const double model = j == 0 ? rest : f[r * (k - 1) + (j - 1)];
                acc += w * theta.prob(r, static_cast<Symbol>(j)) * std::log(model);
            }
        }
        return acc;
    };

    std::vector<std::vector<double>> out(d, std::vector<double>(d, 0.0));
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            auto at = [&](double da, double db) {
                auto f = base;
                f[a] += da;
                f[b] += db;
                return expected_ll(f);
            };
            const double ha = step[a], hb = step[b];
            double v;
            if (a == b) {
                v = (at(ha, 0) - 2 * at(0, 0) + at(-ha, 0)) / (ha * ha);
            } else {
                v = (at(ha, hb) - at(ha, -hb) - at(-ha, hb) + at(-ha, -hb)) / (4 * ha * hb);
            }
            out[a][b] = out[b][a] = -v;
        }
    }
    return out;
}

double det(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    double d = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) return 0.0;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
        }
    }
    return d;
}

double markov2_jeffreys_quadrature(int cells) {
    const auto fam = ParamFamily::markov1(2);
    const double h = 1.0 / cells;
    double acc = 0.0;
    for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) {
            const double s = (i + 0.5) * h, t = (j + 0.5) * h;
            const double p = 1.0 - s * s;  // P(0 -> 1)
            const double q = 1.0 - t * t;  // P(1 -> 0)
            const ParamVector theta(fam, {1.0 - p, p, q, 1.0 - q});
            // The free coordinates are P(0->1) and P(1->1) = 1 - q; both
            // maps have |Jacobian| 2s and 2t.
            acc += std::sqrt(det(fisher_fd(theta))) * 4.0 * s * t;
        }
    }
    return acc * h * h;
}

double ternary_jeffreys_quadrature(int cells) {
    const auto fam = ParamFamily::memoryless(3);
    const double hs = 1.0 / cells, hb = (std::numbers::pi / 2) / cells;
    double acc = 0.0;
    for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) {
            const double s = (i + 0.5) * hs, b = (j + 0.5) * hb;
            const double p1 = s * s;
            const double p2 = (1.0 - p1) * std::sin(b) * std::sin(b);
            const ParamVector theta(fam, {1.0 - p1 - p2, p1, p2});
            const double jac = 2.0 * s * (1.0 - p1) * 2.0 * std::sin(b) * std::cos(b);
            acc += std::sqrt(det(fisher_fd(theta))) * jac;
        }
    }
    return acc * hs * hb;
}

namespace {

double solve(double p0, const std::function<double(double)>& failure, double d, double n) {
    const double target = 1.0 - p0;
    if (failure(0.0) <= target) return (d / 2) * std::log2(n);
    if (failure(1.0) > target) return 0.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (failure(mid) > target ? lo : hi) = mid;
    }
    return (1.0 - 0.5 * (lo + hi)) * (d / 2) * std::log2(n);
}

}  // namespace

double thm1_r0(int d, double n, double p0, double integral) {
    auto f = [&](double e) { return std::pow(2 * std::numbers::pi / std::pow(n, e), d / 2.0) / integral; };
    return solve(p0, f, d, n);
}

double thm2_r0(int d, double n, double p0, double integral) {
    const double cd = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
    auto f = [&](double e) { return cd / integral * std::pow(d / (std::numbers::e * std::pow(n, e)), d / 2.0); };
    return solve(p0, f, d, n);
}

double kl_enum(const ParamVector& theta, const ParamVector& other, int n) {
    const auto s1 = stationary_power(theta), s2 = stationary_power(other);
    double acc = 0.0;
    for_each_sequence(theta.alphabet_size(), n, [&](const Seq& x) {
        const double p = prob_with_start(theta, s1, x);
        if (p > 0.0) acc += p * std::log2(p / prob_with_start(other, s2, x));
    });
    return acc;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return d;
}

}  // namespace oracle
