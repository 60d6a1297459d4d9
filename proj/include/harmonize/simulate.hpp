#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "harmonize/kernels.hpp"
#include "harmonize/measures.hpp"
#include "harmonize/parallel.hpp"

namespace harmonize {

// Control measure Pi~ of the driving random measure on R^{d+1}.
struct ControlSpec {
    enum class Kind { Fbm, Fbs, Fbf, Solution };

    Kind kind = Kind::Fbm;
    int d = 0;
    double H = 0.5;
    std::vector<double> Hj;
    std::optional<SpectralDensity1D> nu;
    std::optional<SpatialMeasure> mu;

    // c_H |tau|^-(2H+1) on the time axis (d = 0).
    static ControlSpec fbm(double H);
    // c_H |tau|^-(2H+1) prod_j c_Hj |xi_j|^-(2Hj+1).
    static ControlSpec fbs(double H, std::vector<double> Hj);
    // c_{H,d+1} (tau^2 + |xi|^2)^-(2H+d+1)/2, normalized so Var X*(y) = |y|^{2H}. d <= 1.
    static ControlSpec fbf(double H, int d);
    // nu(dtau) / tau^2 x mu(dxi) / prod xi_j^2; needs d = 1 or Lebesgue mu.
    static ControlSpec solution(const SpectralDensity1D& nu, const SpatialMeasure& mu);

    std::string describe() const;
};

// Normalizing constant of the fBf control measure on R^D.
double fbf_constant(double H, int D);

// Hermitian-symmetric grid over [-Lambda, Lambda]^{d+1} with n cells per axis.
// Only the half with positive leading coordinate is stored; cell -A is implicit.
struct HermitianGrid {
    int dim = 1;  // d + 1
    double lambda = 0.0;
    std::size_t n = 0;
    double epsilon = 0.0;           // inner cutoff Lambda / n^2 around the singular hyperplanes
    std::vector<double> masses;     // Pi~(A) per half cell
    std::vector<double> nodes;      // dim coordinates per half cell
    ControlSpec spec;

    std::size_t cells() const { return masses.size(); }
    const double* node(std::size_t c) const { return nodes.data() + c * static_cast<std::size_t>(dim); }
    // Mass over both halves.
    double total_mass() const;
};

HermitianGrid build_grid(const ControlSpec& spec, double lambda, std::size_t n, Exec exec = Exec::Parallel);

// Binary layout: "HGRD1", u32 d, f64 Lambda, u64 n, u64 cell count, f64 masses; little-endian.
struct GridFile {
    std::uint32_t d = 0;
    double lambda = 0.0;
    std::uint64_t n = 0;
    std::vector<double> masses;
};
void write_grid(const HermitianGrid& grid, const std::string& path);
GridFile read_grid(const std::string& path);

struct MeasureSample {
    const HermitianGrid* grid = nullptr;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    std::vector<std::complex<double>> z;  // one value per half cell; the mirror is conj

    std::complex<double> mirrored(std::size_t c) const { return std::conj(z[c]); }
};

// Counter-based stream: values depend only on (seed, replicate, cell).
MeasureSample sample_measure(const HermitianGrid& grid, std::uint64_t seed, std::uint64_t replicate = 0);
std::complex<double> cell_gaussian(std::uint64_t seed, std::uint64_t replicate, std::uint64_t cell, double mass);

struct FieldPoint {
    double t = 0.0;
    std::vector<double> x;
};

enum class FieldKind { Rect, Star, Fbm, Solution };

// Integrand of the field functional at one spectral node.
std::complex<double> field_kernel(FieldKind kind, const double* node, int dim, const FieldPoint& p,
                                  const OperatorSpec* op);

// Field values summed over both halves; the imaginary residue must vanish.
double eval_noise_rect(const MeasureSample& s, double t, const std::vector<double>& x);
double eval_noise_star(const MeasureSample& s, double t, const std::vector<double>& x);
double eval_fbm(const MeasureSample& s, double t);
double eval_solution(const MeasureSample& s, const OperatorSpec& op, double t, const std::vector<double>& x);

// One replicate: fill `out` with one value per point.
using Generator = std::function<void(std::uint64_t seed, std::uint64_t replicate, std::span<double> out)>;

// Precomputes the per-cell kernels and returns a fast generator (2 Re sum over the half grid).
Generator field_generator(const HermitianGrid& grid, FieldKind kind, const std::vector<FieldPoint>& points,
                          const OperatorSpec* op = nullptr);

struct MomentTable {
    std::size_t points = 0;
    std::size_t replicates = 0;
    std::vector<double> mean;
    std::vector<double> mean_se;
    std::vector<double> cov;     // row-major points x points, unbiased
    std::vector<double> cov_se;  // jackknife
    double cov_at(std::size_t i, std::size_t j) const { return cov[i * points + j]; }
    double cov_se_at(std::size_t i, std::size_t j) const { return cov_se[i * points + j]; }
};

// Sample moments with jackknife standard errors. Replicates run in parallel
// into their own rows; the reduction is serial in replicate order.
MomentTable mc_moments(const Generator& gen, std::size_t points, std::size_t replicates, std::uint64_t seed,
                       Exec exec = Exec::Parallel);

}  // namespace harmonize
