#include "qdcart/simulation.hpp"

#include <cmath>

#include "qdcart/rng.hpp"

namespace qdcart {

LatticeShape Scenario::shape() const {
    if (dim() == 1) return LatticeShape{n};
    return LatticeShape{n, n};
}

Scenario make_scenario(int id, int n) {
    if (id < 1 || id > 7) throw UsageError("scenario id must be in 1..7");
    const int min_n = (id == 2 || id == 4) ? 32 : 5;
    if (n < min_n)
        throw UsageError("scenario " + std::to_string(id) + " requires n >= " +
                         std::to_string(min_n));
    return Scenario{id, n};
}

NoiseLaw scenario_noise(int id) {
    switch (id) {
        case 3: return NoiseLaw::cauchy;
        case 4: return NoiseLaw::hetero_normal;
        default: return NoiseLaw::student_t25;
    }
}

namespace {

// blocks of scenario 1: [floor(n/5)+1, 2*floor(n/5)] and [3*floor(n/5)+1, n]
double signal_1(int i, int n) {
    const int q = n / 5;
    return ((i >= q + 1 && i <= 2 * q) || i >= 3 * q + 1) ? 1.0 : 0.0;
}

// scenario 2 mixes one-block and narrow bands built from floor(n/32)
double signal_2(int i, int n) {
    const int t = n / 3;
    const int b = n / 32;
    const bool on = (i >= t + 1 && i <= t + b) || (i >= t + 2 * b + 1 && i <= t + 3 * b) ||
                    (i >= t + 4 * b + 1);
    return on ? 1.0 : 0.0;
}

double signal_5(int i, int j, double n) {
    const bool on = (n / 5.0 < i && i < 3.0 * n / 5.0) && (n / 5.0 < j && j < 3.0 * n / 5.0);
    return on ? 1.0 : 0.0;
}

double signal_6(int i, int j, double n) {
    const double r2 = (n / 5.0) * (n / 5.0);
    const double d1i = i - n / 4.0, d1j = j - n / 4.0;
    if (d1i * d1i + d1j * d1j < r2) return 1.0;
    const double d2i = i - 3.0 * n / 4.0, d2j = j - 3.0 * n / 4.0;
    if (d2i * d2i + d2j * d2j < r2) return -1.0;
    return 0.0;
}

// cases evaluated in order; the first match wins
double signal_7(int i, int j, double n) {
    if ((n / 4.0 < i && i < 3.0 * n / 4.0) && (n / 4.0 < j && j < n / 4.0 + n / 8.0)) return 1.0;
    if ((n / 2.0 + n / 8.0 < i && i < 3.0 * n / 4.0) &&
        (n / 4.0 + n / 8.0 <= j && j < 3.0 * n / 4.0))
        return 1.0;
    if (i > 6.0 * n / 8.0 && j > 6.0 * n / 8.0) return -1.0;
    return 0.0;
}

// Marsaglia-Tsang, shape >= 1
double gamma_draw(CellStream& g, double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = g.normal();
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = g.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

// t(2.5) = Z / sqrt(V / 2.5) with V ~ chi-square(2.5) = 2 * Gamma(1.25)
double student_t25_draw(CellStream& g) {
    const double z = g.normal();
    const double v = 2.0 * gamma_draw(g, 1.25);
    return z * std::sqrt(2.5 / v);
}

}  // namespace

std::vector<double> scenario_signal(const Scenario& sc) {
    make_scenario(sc.id, sc.n);  // revalidate
    const int n = sc.n;
    std::vector<double> theta;
    if (sc.dim() == 1) {
        theta.resize(static_cast<std::size_t>(n));
        for (int i = 1; i <= n; ++i) {
            double v = 0.0;
            switch (sc.id) {
                case 1:
                case 3: v = signal_1(i, n); break;
                case 2:
                case 4: v = signal_2(i, n); break;
                default: break;
            }
            theta[static_cast<std::size_t>(i - 1)] = v;
        }
    } else {
        theta.resize(static_cast<std::size_t>(n) * n);
        const auto nd = static_cast<double>(n);
        std::size_t pos = 0;
        for (int i = 1; i <= n; ++i) {
            for (int j = 1; j <= n; ++j, ++pos) {
                double v = 0.0;
                switch (sc.id) {
                    case 5: v = signal_5(i, j, nd); break;
                    case 6: v = signal_6(i, j, nd); break;
                    case 7: v = signal_7(i, j, nd); break;
                    default: break;
                }
                theta[pos] = v;
            }
        }
    }
    return theta;
}

std::vector<double> draw_noise(NoiseLaw law, const LatticeShape& shape, std::uint64_t seed) {
    const auto n_cells = static_cast<std::uint64_t>(shape.cell_count());
    const std::uint64_t key = derive_stream(seed, static_cast<std::uint64_t>(law) + 1);
    std::vector<double> eps(n_cells);
    const auto total = static_cast<double>(n_cells);
    for (std::uint64_t cell = 0; cell < n_cells; ++cell) {
        CellStream stream(key, cell);
        double v = 0.0;
        switch (law) {
            case NoiseLaw::student_t25: v = student_t25_draw(stream); break;
            case NoiseLaw::cauchy: v = std::tan(M_PI * (stream.uniform() - 0.5)); break;
            case NoiseLaw::hetero_normal: {
                const auto i = static_cast<double>(cell + 1);  // 1-based linear index
                v = stream.normal() * std::sqrt(2.0 * i / total + 1.0);
                break;
            }
        }
        eps[cell] = v;
    }
    return eps;
}

Dataset generate(const Scenario& sc, std::uint64_t seed) {
    const Scenario valid = make_scenario(sc.id, sc.n);
    Dataset ds;
    ds.scenario = valid;
    ds.seed = seed;
    ds.theta_star = scenario_signal(valid);
    const std::uint64_t stream_seed = derive_stream(
        seed, static_cast<std::uint64_t>(valid.id), static_cast<std::uint64_t>(valid.n));
    ds.y = draw_noise(scenario_noise(valid.id), valid.shape(), stream_seed);
    for (std::size_t i = 0; i < ds.y.size(); ++i) ds.y[i] += ds.theta_star[i];
    return ds;
}

}  // namespace qdcart
