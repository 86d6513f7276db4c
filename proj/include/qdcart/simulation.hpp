#pragma once

#include <cstdint>
#include <vector>

#include "qdcart/lattice.hpp"

namespace qdcart {

/// One of the seven benchmark data-generating scenarios. Scenarios 1-4
/// are one-dimensional, 5-7 live on an n x n grid.
struct Scenario {
    int id = 1;
    int n = 0;

    int dim() const { return id <= 4 ? 1 : 2; }
    LatticeShape shape() const;
};

Scenario make_scenario(int id, int n);  // validates id and the minimum n

enum class NoiseLaw { student_t25, cauchy, hetero_normal };

/// Noise law attached to each scenario: t(2.5) for 1, 2, 5, 6, 7;
/// Cauchy(0,1) for 3; heteroscedastic normal for 4.
NoiseLaw scenario_noise(int id);

/// The piecewise-constant true signal of a scenario, values in {-1,0,1}.
std::vector<double> scenario_signal(const Scenario& sc);

/// I.i.d. draws of `law` over the lattice, deterministic in `seed` and
/// independent of evaluation order (counter-based per-cell substreams).
/// The heteroscedastic law scales cell i (1-based linear index) by
/// sqrt(2i/N + 1).
std::vector<double> draw_noise(NoiseLaw law, const LatticeShape& shape, std::uint64_t seed);

struct Dataset {
    Scenario scenario;
    std::uint64_t seed = 0;
    std::vector<double> y;           // signal + noise
    std::vector<double> theta_star;  // true signal
};

/// y = signal + noise with the scenario's law. The noise stream is keyed
/// by (seed, scenario id, n) so different scenarios and sizes are
/// independent at equal seeds.
Dataset generate(const Scenario& sc, std::uint64_t seed);

}  // namespace qdcart
