#pragma once

#include <map>
#include <string>
#include <vector>

#include "harmonize/kernels.hpp"
#include "harmonize/measures.hpp"
#include "harmonize/parallel.hpp"
#include "harmonize/quadrature.hpp"

namespace harmonize {

enum class Decision { Yes, No, Inconclusive };
const char* to_string(Decision d);

// Which integrability condition the reduced exponent comes from.
enum class ConditionSource { ParabolicCond, HyperbolicCond, CondHyp };
const char* to_string(ConditionSource s);

struct ReducedCondition {
    // p in int (1 + Psi)^-p dmu; NaN when no closed form applies.
    double exponent = 0.0;
    ConditionSource source = ConditionSource::ParabolicCond;
    bool analytic = false;
};

struct ExistenceReport {
    Decision decision = Decision::Inconclusive;
    ReducedCondition reduced;
    ConvergenceVerdict oracle;
    bool oracle_run = false;
    bool agreement = true;
    std::string note;
};

// Finiteness of int (1 + |xi|^beta)^-p |xi|^-alpha dxi over R^d.
bool power_law_decision(double p, double alpha, double beta, int d);

// Analytic decision (Riesz/Bessel nu) cross-checked by the shell classifier
// applied to r -> N_1(Psi(r)). Custom nu uses the classifier alone.
ExistenceReport decide_existence(const OperatorSpec& op, const SpectralDensity1D& nu, const SpatialMeasure& mu,
                                 bool run_oracle = true, Exec exec = Exec::Parallel);

enum class IndicatorKind { FBS, FBF, CustomIsotropic };

struct IndicatorSpec {
    IndicatorKind kind = IndicatorKind::FBS;
    double H = 0.5;
    std::vector<double> Hj;  // fBs spatial indices
    int d = 1;
    double q = 0.0;  // CustomIsotropic: Pi~ = (tau^2 + |xi|^2)^(-q/2) on R^{d+1}
};

// Is int [1 ^ (tau^2 + |xi|^2)] Pi~(dtau, dxi) finite?
bool check_indicator_condition(const IndicatorSpec& spec);

// Variants of the wave reference function in the two-sided bounds.
enum class WaveForm {
    CondHyp,        // eta(b) / b^2 with b = sqrt(1 + psi)
    HyperbolicCond,  // b^-1 int nu(dtau) / (|tau| + b)^2
    HyperbolicCond2  // b^-1 int nu(dtau) / (tau^2 + b^2)
};
const char* to_string(WaveForm f);
WaveForm wave_form_from(const std::string& s);

struct BoundRow {
    double t = 0.0;
    double psi = 0.0;
    double n_t = 0.0;
    double reference = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool pass = false;
};

struct BoundReport {
    EquationKind kind = EquationKind::Heat;
    WaveForm form = WaveForm::CondHyp;
    std::vector<BoundRow> rows;
    // Per t: named constants from the proofs.
    std::vector<std::pair<double, std::map<std::string, double>>> constants;

    bool all_pass() const;
};

// Heat reference: B(psi) = int nu(dtau) / (tau^2 + (1 + psi)^2).
double heat_reference(const SpectralDensity1D& nu, double psi);
// Wave references in both forms, plus the hyperbolic-cond2 integral int nu / (tau^2 + b^2).
double wave_reference(const SpectralDensity1D& nu, double psi, WaveForm form);
double hyperbolic_cond2_reference(const SpectralDensity1D& nu, double psi);

// Proof constants for one t.
std::map<std::string, double> heat_constants(const SpectralDensity1D& nu, double t);
std::map<std::string, double> wave_constants(const SpectralDensity1D& nu, double t);

// N_t against lower/upper bounds on the (t, psi) grid; pass uses slack 1 + 1e-6.
BoundReport verify_bounds(const OperatorSpec& op, const SpectralDensity1D& nu, const std::vector<double>& t_grid,
                          const std::vector<double>& psi_grid, WaveForm form = WaveForm::CondHyp,
                          Exec exec = Exec::Parallel);

}  // namespace harmonize
