#include "harmonize/simulate.hpp"

#include <gsl/gsl_integration.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "harmonize/errors.hpp"
#include "harmonize/quadrature.hpp"

namespace harmonize {

static_assert(std::endian::native == std::endian::little, "grid files are written in host order");

namespace {

using cplx = std::complex<double>;

// e^{-i theta} - 1 without cancellation for small theta.
cplx expm1_neg_i(double theta) {
    const double s = std::sin(0.5 * theta);
    return cplx(-2.0 * s * s, -std::sin(theta));
}

// One axis factor of a product control measure: c |x|^-p or a density.
struct Factor {
    bool power = true;
    double c = 1.0;
    double p = 0.0;
    std::function<double(double)> density;

    // Mass and second moment over [x0, x1] with 0 <= x0 < x1.
    std::pair<double, double> moments(double x0, double x1) const {
        if (power) {
            auto prim = [](double a, double b, double e) {
                return e == 0.0 ? std::log(b / a) : (std::pow(b, e) - std::pow(a, e)) / e;
            };
            return {c * prim(x0, x1, 1.0 - p), c * prim(x0, x1, 3.0 - p)};
        }
        const RealFn f0 = [this](double x) { return density(x); };
        const RealFn f2 = [this](double x) { return x * x * density(x); };
        QuadResult m0 = integrate_interval(f0, x0, x1, {1e-10, 0.0, 2000});
        QuadResult m2 = integrate_interval(f2, x0, x1, {1e-10, 0.0, 2000});
        if (!m0.converged || !m2.converged)
            throw QuadratureError("cell mass quadrature did not converge", m0.abs_error_estimate);
        return {m0.value, m2.value};
    }
};

struct AxisTable {
    std::vector<double> mass;
    std::vector<double> node;
};

// Intervals [-L + i h, -L + (i+1) h]; the cells touching 0 start at eps.
AxisTable axis_table(const Factor& f, double lambda, std::size_t n, double eps) {
    AxisTable tab;
    tab.mass.resize(n);
    tab.node.resize(n);
    const double h = 2.0 * lambda / static_cast<double>(n);
    const std::size_t half = n / 2;
    for (std::size_t k = 0; k < half; ++k) {
        const double x0 = k == 0 ? eps : static_cast<double>(k) * h;
        const double x1 = static_cast<double>(k + 1) * h;
        auto [m0, m2] = f.moments(x0, x1);
        if (!(m0 > 0.0) || !std::isfinite(m0) || !std::isfinite(m2))
            throw DomainError("divergent cell mass; shrink cells away from the hyperplane");
        const double node = std::sqrt(m2 / m0);
        tab.mass[half + k] = m0;
        tab.node[half + k] = node;
        tab.mass[half - 1 - k] = m0;
        tab.node[half - 1 - k] = -node;
    }
    return tab;
}

std::vector<Factor> product_factors(const ControlSpec& spec) {
    std::vector<Factor> fs;
    auto power = [](double c, double p) {
        Factor f;
        f.c = c;
        f.p = p;
        return f;
    };
    switch (spec.kind) {
        case ControlSpec::Kind::Fbm: fs.push_back(power(fbm_constant(spec.H), 2.0 * spec.H + 1.0)); break;
        case ControlSpec::Kind::Fbs:
            fs.push_back(power(fbm_constant(spec.H), 2.0 * spec.H + 1.0));
            for (double h : spec.Hj) fs.push_back(power(fbm_constant(h), 2.0 * h + 1.0));
            break;
        case ControlSpec::Kind::Fbf:
            // Only reached for d = 0, where the field is fBm.
            fs.push_back(power(fbf_constant(spec.H, 1), 2.0 * spec.H + 1.0));
            break;
        case ControlSpec::Kind::Solution: {
            const SpectralDensity1D& nu = *spec.nu;
            if (nu.kind() == DensityKind::Riesz) {
                fs.push_back(power(nu.scale(), nu.gamma() + 2.0));
            } else {
                Factor f;
                f.power = false;
                f.density = [nu](double x) { return nu.eta(x) / (x * x); };
                fs.push_back(f);
            }
            const SpatialMeasure& mu = *spec.mu;
            for (int j = 0; j < spec.d; ++j) {
                const double c = j == 0 ? mu.scale() : 1.0;
                if (mu.kind() == SpatialKind::Lebesgue) {
                    fs.push_back(power(c, 2.0));
                } else if (mu.kind() == SpatialKind::RadialPower) {
                    fs.push_back(power(c, mu.alpha() + 2.0));
                } else {
                    Factor f;
                    f.power = false;
                    const double a = mu.alpha();
                    f.density = [c, a](double x) { return c * std::pow(1.0 + x * x, -0.5 * a) / (x * x); };
                    fs.push_back(f);
                }
            }
            break;
        }
    }
    return fs;
}

// Decompose a half-cell index into per-axis indices (leading axis restricted to the positive half).
void cell_axes(std::size_t c, int dim, std::size_t n, std::size_t* idx) {
    for (int j = dim - 1; j >= 1; --j) {
        idx[j] = c % n;
        c /= n;
    }
    idx[0] = n / 2 + c;
}

const gsl_integration_glfixed_table* gl_table(std::size_t points) {
    static const gsl_integration_glfixed_table* t16 = gsl_integration_glfixed_table_alloc(16);
    static const gsl_integration_glfixed_table* t32 = gsl_integration_glfixed_table_alloc(32);
    return points == 16 ? t16 : t32;
}

struct CellMoments {
    double m0 = 0.0;
    double m_tau = 0.0;
    double m_xi = 0.0;
};

// fBf cell [0,h]^2 in polar coordinates with the disk r < eps removed.
CellMoments fbf_origin_cell(double c, double H, double h, double eps) {
    const auto* tab = gl_table(32);
    CellMoments out;
    for (int piece = 0; piece < 2; ++piece) {
        const double lo = piece == 0 ? 0.0 : M_PI / 4.0;
        const double hi = piece == 0 ? M_PI / 4.0 : M_PI / 2.0;
        for (std::size_t i = 0; i < 32; ++i) {
            double th = 0.0;
            double w = 0.0;
            gsl_integration_glfixed_point(lo, hi, i, &th, &w, tab);
            const double rmax = piece == 0 ? h / std::cos(th) : h / std::sin(th);
            const double r0 = (std::pow(eps, -2.0 * H) - std::pow(rmax, -2.0 * H)) / (2.0 * H);
            const double r2 = (std::pow(rmax, 2.0 - 2.0 * H) - std::pow(eps, 2.0 - 2.0 * H)) / (2.0 - 2.0 * H);
            const double cs = std::cos(th);
            const double sn = std::sin(th);
            out.m0 += w * c * r0;
            out.m_tau += w * c * cs * cs * r2;
            out.m_xi += w * c * sn * sn * r2;
        }
    }
    return out;
}

// Tensor Gauss-Legendre over [a,b] x [lo,hi] split into k x k blocks.
CellMoments fbf_cell(double c, double H, double a, double b, double lo, double hi, int k) {
    const auto* tab = gl_table(16);
    const double e = -(H + 1.0);
    CellMoments out;
    const double da = (b - a) / k;
    const double dl = (hi - lo) / k;
    for (int bi = 0; bi < k; ++bi) {
        for (int bj = 0; bj < k; ++bj) {
            const double a0 = a + bi * da;
            const double l0 = lo + bj * dl;
            for (std::size_t i = 0; i < 16; ++i) {
                double x = 0.0;
                double wx = 0.0;
                gsl_integration_glfixed_point(a0, a0 + da, i, &x, &wx, tab);
                for (std::size_t j = 0; j < 16; ++j) {
                    double y = 0.0;
                    double wy = 0.0;
                    gsl_integration_glfixed_point(l0, l0 + dl, j, &y, &wy, tab);
                    const double f = c * std::pow(x * x + y * y, e) * wx * wy;
                    out.m0 += f;
                    out.m_tau += f * x * x;
                    out.m_xi += f * y * y;
                }
            }
        }
    }
    return out;
}

void build_fbf_plane(HermitianGrid& g, Exec exec) {
    const std::size_t n = g.n;
    const double h = 2.0 * g.lambda / static_cast<double>(n);
    const double c = fbf_constant(g.spec.H, 2);
    const double H = g.spec.H;
    const std::size_t half = n / 2;
    for_each_index(g.cells(), exec, [&](std::size_t cell) {
        std::size_t idx[2];
        cell_axes(cell, 2, n, idx);
        const std::size_t it = idx[0] - half;  // tau in [it h, (it+1) h]
        const bool xi_pos = idx[1] >= half;
        const std::size_t ix = xi_pos ? idx[1] - half : half - 1 - idx[1];
        CellMoments m;
        if (it == 0 && ix == 0) {
            m = fbf_origin_cell(c, H, h, g.epsilon);
        } else {
            const int k = (it < 4 && ix < 4) ? 4 : 1;
            m = fbf_cell(c, H, it * h, (it + 1) * h, ix * h, (ix + 1) * h, k);
        }
        g.masses[cell] = m.m0;
        g.nodes[2 * cell] = std::sqrt(m.m_tau / m.m0);
        g.nodes[2 * cell + 1] = (xi_pos ? 1.0 : -1.0) * std::sqrt(m.m_xi / m.m0);
    });
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

ControlSpec ControlSpec::fbm(double H) {
    if (!(H > 0.0 && H < 1.0)) throw PreconditionError("Hurst index must lie in (0, 1)");
    ControlSpec s;
    s.kind = Kind::Fbm;
    s.H = H;
    return s;
}

ControlSpec ControlSpec::fbs(double H, std::vector<double> Hj) {
    if (!(H > 0.0 && H < 1.0)) throw PreconditionError("Hurst index must lie in (0, 1)");
    for (double h : Hj)
        if (!(h > 0.0 && h < 1.0)) throw PreconditionError("Hurst indices must lie in (0, 1)");
    ControlSpec s;
    s.kind = Kind::Fbs;
    s.H = H;
    s.d = static_cast<int>(Hj.size());
    s.Hj = std::move(Hj);
    return s;
}

ControlSpec ControlSpec::fbf(double H, int d) {
    if (!(H > 0.0 && H < 1.0)) throw PreconditionError("Hurst index must lie in (0, 1)");
    if (d < 0 || d > 1) throw PreconditionError("fBf grids are implemented for d <= 1");
    ControlSpec s;
    s.kind = Kind::Fbf;
    s.H = H;
    s.d = d;
    return s;
}

ControlSpec ControlSpec::solution(const SpectralDensity1D& nu, const SpatialMeasure& mu) {
    if (mu.kind() == SpatialKind::Discrete) throw PreconditionError("solution grids need a radial spatial measure");
    if (mu.dim() != 1 && mu.kind() != SpatialKind::Lebesgue)
        throw PreconditionError("the control measure is a product only for d = 1 or Lebesgue mu");
    ControlSpec s;
    s.kind = Kind::Solution;
    s.d = mu.dim();
    s.nu = nu;
    s.mu = mu;
    return s;
}

std::string ControlSpec::describe() const {
    switch (kind) {
        case Kind::Fbm: return "fbm:H=" + num(H);
        case Kind::Fbs: {
            std::string s = "fbs:H=" + num(H);
            for (double h : Hj) s += ",H=" + num(h);
            return s;
        }
        case Kind::Fbf: return "fbf:H=" + num(H) + ",d=" + std::to_string(d);
        case Kind::Solution: return "solution:nu=" + nu->describe() + ",mu=" + mu->describe();
    }
    return "";
}

double fbf_constant(double H, int D) {
    if (!(H > 0.0 && H < 1.0)) throw PreconditionError("Hurst index must lie in (0, 1)");
    if (D < 1) throw PreconditionError("dimension must be positive");
    const double half = 0.5 * D;
    const double integral =
        2.0 * std::pow(M_PI, half) * std::tgamma(1.0 - H) / (std::pow(2.0, 2.0 * H) * H * std::tgamma(H + half));
    return 1.0 / integral;
}

double HermitianGrid::total_mass() const {
    double s = 0.0;
    for (double m : masses) s += m;
    return 2.0 * s;
}

HermitianGrid build_grid(const ControlSpec& spec, double lambda, std::size_t n, Exec exec) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw PreconditionError("Lambda must be positive");
    if (n < 2 || n % 2 != 0) throw PreconditionError("n must be even and at least 2");
    HermitianGrid g;
    g.dim = spec.d + 1;
    g.lambda = lambda;
    g.n = n;
    g.epsilon = lambda / (static_cast<double>(n) * static_cast<double>(n));
    g.spec = spec;
    std::size_t count = n / 2;
    for (int j = 1; j < g.dim; ++j) count *= n;
    g.masses.assign(count, 0.0);
    g.nodes.assign(count * static_cast<std::size_t>(g.dim), 0.0);

    if (spec.kind == ControlSpec::Kind::Fbf && spec.d == 1) {
        build_fbf_plane(g, exec);
        return g;
    }

    const std::vector<Factor> factors = product_factors(spec);
    std::vector<AxisTable> axes;
    for (const Factor& f : factors) axes.push_back(axis_table(f, lambda, n, g.epsilon));
    for_each_index(count, exec, [&](std::size_t c) {
        std::size_t idx[16];
        cell_axes(c, g.dim, n, idx);
        double m = 1.0;
        for (int j = 0; j < g.dim; ++j) {
            m *= axes[j].mass[idx[j]];
            g.nodes[c * g.dim + j] = axes[j].node[idx[j]];
        }
        g.masses[c] = m;
    });
    return g;
}

void write_grid(const HermitianGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    const std::uint32_t d = static_cast<std::uint32_t>(grid.dim - 1);
    const std::uint64_t n = grid.n;
    const std::uint64_t count = grid.masses.size();
    out.write("HGRD1", 5);
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    out.write(reinterpret_cast<const char*>(&grid.lambda), sizeof grid.lambda);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(grid.masses.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw Error("failed writing " + path);
}

GridFile read_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "HGRD1", 5) != 0) throw Error(path + " is not an HGRD1 grid file");
    GridFile f;
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&f.d), sizeof f.d);
    in.read(reinterpret_cast<char*>(&f.lambda), sizeof f.lambda);
    in.read(reinterpret_cast<char*>(&f.n), sizeof f.n);
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!in || count > (1ULL << 32)) throw Error(path + ": truncated or corrupt header");
    f.masses.resize(count);
    in.read(reinterpret_cast<char*>(f.masses.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw Error(path + ": truncated mass table");
    return f;
}

std::complex<double> cell_gaussian(std::uint64_t seed, std::uint64_t replicate, std::uint64_t cell, double mass) {
    const std::uint64_t key = splitmix64(splitmix64(seed) ^ splitmix64(replicate + 0x632be59bd9b4e019ULL));
    const std::uint64_t h1 = splitmix64(key ^ (2 * cell));
    const std::uint64_t h2 = splitmix64(key ^ (2 * cell + 1));
    const double u1 = (static_cast<double>(h1 >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;          // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double s = std::sqrt(0.5 * mass);
    return {s * r * std::cos(2.0 * M_PI * u2), s * r * std::sin(2.0 * M_PI * u2)};
}

MeasureSample sample_measure(const HermitianGrid& grid, std::uint64_t seed, std::uint64_t replicate) {
    MeasureSample s;
    s.grid = &grid;
    s.seed = seed;
    s.replicate = replicate;
    s.z.resize(grid.cells());
    for (std::size_t c = 0; c < grid.cells(); ++c) s.z[c] = cell_gaussian(seed, replicate, c, grid.masses[c]);
    return s;
}

std::complex<double> field_kernel(FieldKind kind, const double* node, int dim, const FieldPoint& p,
                                  const OperatorSpec* op) {
    const double tau = node[0];
    switch (kind) {
        case FieldKind::Fbm: return expm1_neg_i(tau * p.t);
        case FieldKind::Rect: {
            cplx k = expm1_neg_i(tau * p.t);
            for (int j = 1; j < dim; ++j) k *= expm1_neg_i(node[j] * p.x[j - 1]);
            return k;
        }
        case FieldKind::Star: {
            double phase = tau * p.t;
            for (int j = 1; j < dim; ++j) phase += node[j] * p.x[j - 1];
            return expm1_neg_i(phase);
        }
        case FieldKind::Solution: {
            if (p.t <= 0.0) return 0.0;
            double phase = tau * p.t;
            double r2 = 0.0;
            cplx factor(0.0, -tau);
            for (int j = 1; j < dim; ++j) {
                phase += node[j] * p.x[j - 1];
                r2 += node[j] * node[j];
                factor *= cplx(0.0, -node[j]);
            }
            const cplx f = windowed(*op, tau, op->psi(std::sqrt(r2)), p.t).value;
            return std::polar(1.0, -phase) * std::conj(f) * factor;
        }
    }
    return 0.0;
}

namespace {

void check_point(const HermitianGrid& g, FieldKind kind, const FieldPoint& p, const OperatorSpec* op) {
    if (static_cast<int>(p.x.size()) != g.dim - 1) throw PreconditionError("point dimension does not match the grid");
    if (kind == FieldKind::Fbm && g.dim != 1) throw PreconditionError("fBm evaluation needs a time-only grid");
    if (kind == FieldKind::Solution) {
        if (g.spec.kind != ControlSpec::Kind::Solution) throw PreconditionError("solution needs a solution grid");
        if (op == nullptr || op->d != g.dim - 1) throw PreconditionError("operator dimension does not match the grid");
    }
}

double eval_full(const MeasureSample& s, FieldKind kind, const FieldPoint& p, const OperatorSpec* op) {
    const HermitianGrid& g = *s.grid;
    check_point(g, kind, p, op);
    std::vector<double> neg(static_cast<std::size_t>(g.dim));
    cplx sum = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const double* node = g.node(c);
        for (int j = 0; j < g.dim; ++j) neg[j] = -node[j];
        sum += field_kernel(kind, node, g.dim, p, op) * s.z[c];
        sum += field_kernel(kind, neg.data(), g.dim, p, op) * s.mirrored(c);
    }
    if (std::abs(sum.imag()) > 1e-10 * (1.0 + std::abs(sum.real())))
        throw Error("Hermitian cancellation failed: imaginary part " + num(sum.imag()));
    return sum.real();
}

}  // namespace

double eval_noise_rect(const MeasureSample& s, double t, const std::vector<double>& x) {
    return eval_full(s, FieldKind::Rect, {t, x}, nullptr);
}

double eval_noise_star(const MeasureSample& s, double t, const std::vector<double>& x) {
    return eval_full(s, FieldKind::Star, {t, x}, nullptr);
}

double eval_fbm(const MeasureSample& s, double t) { return eval_full(s, FieldKind::Fbm, {t, {}}, nullptr); }

double eval_solution(const MeasureSample& s, const OperatorSpec& op, double t, const std::vector<double>& x) {
    return op.w(t, x) + eval_full(s, FieldKind::Solution, {t, x}, &op);
}

Generator field_generator(const HermitianGrid& grid, FieldKind kind, const std::vector<FieldPoint>& points,
                          const OperatorSpec* op) {
    for (const FieldPoint& p : points) check_point(grid, kind, p, op);
    const std::size_t np = points.size();
    const std::size_t nc = grid.cells();
    // Cell-major kernel table so one replicate streams through memory once.
    auto table = std::make_shared<std::vector<cplx>>(nc * np);
    for_each_index(nc, Exec::Parallel, [&](std::size_t c) {
        for (std::size_t p = 0; p < np; ++p) (*table)[c * np + p] = field_kernel(kind, grid.node(c), grid.dim, points[p], op);
    });
    std::vector<double> offsets(np, 0.0);
    if (kind == FieldKind::Solution)
        for (std::size_t p = 0; p < np; ++p) offsets[p] = op->w(points[p].t, points[p].x);
    const HermitianGrid* g = &grid;
    return [table, offsets, g, np](std::uint64_t seed, std::uint64_t replicate, std::span<double> out) {
        std::vector<double> acc(np, 0.0);
        const std::size_t nc = g->cells();
        for (std::size_t c = 0; c < nc; ++c) {
            const cplx z = cell_gaussian(seed, replicate, c, g->masses[c]);
            const cplx* k = table->data() + c * np;
            for (std::size_t p = 0; p < np; ++p) acc[p] += k[p].real() * z.real() - k[p].imag() * z.imag();
        }
        // The mirror cell contributes the conjugate, so the pair sums to 2 Re.
        for (std::size_t p = 0; p < np; ++p) out[p] = offsets[p] + 2.0 * acc[p];
    };
}

MomentTable mc_moments(const Generator& gen, std::size_t points, std::size_t replicates, std::uint64_t seed,
                       Exec exec) {
    if (replicates < 100) throw PreconditionError("mc_moments needs at least 100 replicates");
    if (points == 0) throw PreconditionError("mc_moments needs at least one point");
    const std::size_t N = replicates;
    std::vector<double> vals(N * points);
    for_each_index(N, exec, [&](std::size_t r) { gen(seed, r, std::span<double>(vals.data() + r * points, points)); });

    MomentTable m;
    m.points = points;
    m.replicates = N;
    m.mean.assign(points, 0.0);
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t p = 0; p < points; ++p) m.mean[p] += vals[r * points + p];
    for (double& v : m.mean) v /= static_cast<double>(N);

    // Centered copy keeps the leave-one-out formulas well conditioned.
    std::vector<double> y(vals.size());
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t p = 0; p < points; ++p) y[r * points + p] = vals[r * points + p] - m.mean[p];

    const double dn = static_cast<double>(N);
    m.cov.assign(points * points, 0.0);
    m.cov_se.assign(points * points, 0.0);
    m.mean_se.assign(points, 0.0);
    std::vector<double> loo(N);
    for (std::size_t i = 0; i < points; ++i) {
        for (std::size_t j = i; j < points; ++j) {
            double sx = 0.0, sy = 0.0, sxy = 0.0;
            for (std::size_t r = 0; r < N; ++r) {
                const double a = y[r * points + i];
                const double b = y[r * points + j];
                sx += a;
                sy += b;
                sxy += a * b;
            }
            const double c = (sxy - sx * sy / dn) / (dn - 1.0);
            double loo_mean = 0.0;
            for (std::size_t r = 0; r < N; ++r) {
                const double a = y[r * points + i];
                const double b = y[r * points + j];
                loo[r] = (sxy - a * b - (sx - a) * (sy - b) / (dn - 1.0)) / (dn - 2.0);
                loo_mean += loo[r];
            }
            loo_mean /= dn;
            double ss = 0.0;
            for (std::size_t r = 0; r < N; ++r) ss += (loo[r] - loo_mean) * (loo[r] - loo_mean);
            const double se = std::sqrt((dn - 1.0) / dn * ss);
            m.cov[i * points + j] = m.cov[j * points + i] = c;
            m.cov_se[i * points + j] = m.cov_se[j * points + i] = se;
        }
        m.mean_se[i] = std::sqrt(std::max(m.cov[i * points + i], 0.0) / dn);
    }
    return m;
}

}  // namespace harmonize
