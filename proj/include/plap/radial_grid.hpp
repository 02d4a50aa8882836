#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "plap/errors.hpp"
#include "plap/exact_solutions.hpp"

namespace plap {

/// Uniform radial finite-volume grid on the ball of radius R in R^N:
/// M cells of width dr, centers r_j = (j+1/2)dr, faces at j*dr, volumes
/// ω_N ((r_{j+1/2})^N − (r_{j−1/2})^N)/N.
struct RadialGrid {
    int dim = 1;
    double outer_radius = 1.0;
    int cells = 0;
    double dr = 0.0;
    double omega = 2.0;  ///< unit sphere area ω_N
    std::vector<double> center;
    std::vector<double> volume;

    RadialGrid(int N, double R, int M) : dim(N), outer_radius(R), cells(M) {
        if (N < 1) throw precondition_error("RadialGrid: N >= 1");
        if (!(R > 0.0) || M < 2) throw precondition_error("RadialGrid: need R > 0, M >= 2");
        dr = R / M;
        omega = unit_sphere_area(N);
        center.resize(M);
        volume.resize(M);
        for (int j = 0; j < M; ++j) {
            center[j] = (j + 0.5) * dr;
            volume[j] = omega * (std::pow((j + 1) * dr, N) - std::pow(j * dr, N)) / N;
        }
    }

    double face(int i) const { return i * dr; }                            ///< i = 0..M
    double face_area(int i) const { return omega * std::pow(face(i), dim - 1); }
};

/// A radially symmetric snapshot: cell-center values at one time.
struct RadialField {
    std::shared_ptr<const RadialGrid> grid;
    std::vector<double> values;
    double time = 0.0;
};

/// Σ_j volume_j u_j.
inline double discrete_mass(const RadialField& f) {
    double m = 0.0;
    for (int j = 0; j < f.grid->cells; ++j) m += f.grid->volume[j] * f.values[j];
    return m;
}

/// Linear interpolation of cell values at radius r (clamped at the ends).
inline double field_value_at(const RadialField& f, double r) {
    const auto& g = *f.grid;
    if (r <= g.center.front()) return f.values.front();
    if (r >= g.center.back()) return f.values.back();
    const double x = r / g.dr - 0.5;
    const int j = static_cast<int>(x);
    const double t = x - j;
    return f.values[j] * (1.0 - t) + f.values[j + 1] * t;
}

}  // namespace plap
