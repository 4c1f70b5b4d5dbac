#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msbl/coefficients.hpp"
#include "msbl/integrators.hpp"

namespace msbl {

/// Bounded observable phi: H_m -> R with bounded derivatives.
struct TestFunctional {
    std::string id;
    std::function<double(std::span<const double>)> eval;
};

/// sin_e1: sin(<x,e_1>); exp_neg_norm2: exp(-|x|^2); inv_one_plus_norm2: 1/(1+|x|^2);
/// constant: 1 (degenerate on purpose).
TestFunctional test_functional(const std::string& id);

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Weighted least squares of log(error) on log(eps); weights (error/std_err)^2 when
/// every std_err is positive, uniform otherwise. 95% interval from the residual
/// variance and Student t with n-2 degrees of freedom.
OrderFit fit_order(std::span<const double> eps, std::span<const double> errors,
                   std::span<const double> std_errs);

/// Study failures, mapped to CLI exit codes.
class StudyError : public std::runtime_error {
public:
    StudyError(int exit_code, const std::string& what) : std::runtime_error(what), code_(exit_code) {}
    int exit_code() const { return code_; }

private:
    int code_;
};

struct BiasGuard {
    bool checked = false;
    bool passed = true;
    double eps = 0.0;
    double dt_bias = 0.0;
    double averaging_error = 0.0;
    double suggested_macro_dt = 0.0;
    std::size_t probe_paths = 0;
};

struct StudyProtocol {
    std::string kind;
    std::string model_id;
    std::size_t m = 0;
    double T = 0.0;
    double macro_dt = 0.0;
    double kappa = 0.0;
    std::string drive;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    double p = 2.0;
    std::string phi_id;
    std::string evaluation;
    std::string sup_surrogate;
    std::vector<double> x0, y0;
};

struct ErrorReport {
    std::vector<double> eps_grid;
    std::vector<double> errors;
    std::vector<double> std_errs;
    /// Weak studies with sup evaluation: time at which the supremum was attained.
    std::vector<double> t_star;
    std::vector<bool> flagged;
    bool degenerate = false;
    OrderFit fit;
    StudyProtocol protocol;
    BiasGuard guard;

    double fitted_order() const { return fit.slope; }
    bool all_flags_clear() const;
};

/// Receives the slow coupled and averaged states at macro node i (0..N).
using PairObserver = std::function<void(std::size_t node, std::span<const double> x_eps,
                                        std::span<const double> x_bar)>;
/// Produces one coupled/averaged path pair at scale eps. Injectable for tests.
using PairRunner = std::function<void(double eps, std::uint32_t path_id, const PairObserver&)>;

/// Shared-W1 coupled pair of simulate_coupled / simulate_averaged.
PairRunner make_pair_runner(const ModelSpec& model, const SineField& x0, const SineField& y0,
                            const SimParams& base, FbarMode mode = FbarAnalytic{});

enum class WeakEvaluation { sup_grid, terminal };

struct StrongStudyOptions {
    double p = 2.0;
    bool check_assumptions = true;
    bool bias_guard = true;
    std::size_t probe_paths = 20;
};

struct WeakStudyOptions {
    WeakEvaluation evaluation = WeakEvaluation::sup_grid;
    bool check_assumptions = true;
    bool bias_guard = true;
    std::size_t probe_paths = 200;
};

/// Step-halving probe at the smallest eps: coupled/averaged pairs at macro_dt (with
/// 2-fold noise refinement) against macro_dt/2 on the same Brownian paths.
BiasGuard strong_bias_guard(const ModelSpec& model, const SineField& x0, const SineField& y0,
                            const SimParams& params, double eps, std::size_t probe_paths, double p);
BiasGuard weak_bias_guard(const ModelSpec& model, const SineField& x0, const SineField& y0,
                          const SimParams& params, double eps, std::size_t probe_paths,
                          const TestFunctional& phi);

/// (E sup_t |X^eps - Xbar|^p)^{1/p} per eps over params.n_paths shared-W1 pairs.
ErrorReport strong_error_study(const ModelSpec& model, const SineField& x0, const SineField& y0,
                               std::vector<double> eps_grid, const SimParams& params,
                               const StrongStudyOptions& opts = {});
/// Same with an injected pair runner (no validation, no bias guard).
ErrorReport strong_error_study(const PairRunner& runner, std::vector<double> eps_grid,
                               const SimParams& params, double p);

/// |E phi(X^eps) - E phi(Xbar)| via the coupled difference estimator.
ErrorReport weak_error_study(const ModelSpec& model, const SineField& x0, const SineField& y0,
                             const TestFunctional& phi, std::vector<double> eps_grid,
                             const SimParams& params, const WeakStudyOptions& opts = {});
ErrorReport weak_error_study(const PairRunner& runner, const TestFunctional& phi,
                             std::vector<double> eps_grid, const SimParams& params,
                             WeakEvaluation evaluation);

struct MomentReport {
    std::vector<double> eps_grid;
    std::vector<double> slow_sup_moment;   // E sup_t |X^eps_t|^p
    std::vector<double> slow_std_err;
    std::vector<double> fast_moment;       // sup_t E |Y^eps_t|^p
    double p = 2.0;
    double slow_ratio = 0.0;
    double fast_ratio = 0.0;
    double ratio_max = 1.2;
    bool passed = false;
    StudyProtocol protocol;
};

MomentReport moment_check(const ModelSpec& model, const SineField& x0, const SineField& y0,
                          std::vector<double> eps_grid, const SimParams& params, double p,
                          double ratio_max = 1.2);

struct GalerkinReport {
    double eps = 0.0;
    std::vector<std::size_t> m_list;
    std::size_t m_ref = 0;
    std::vector<double> errors;  // (E sup_t |X^m - X^{m_ref}|^2)^{1/2}
    std::vector<double> std_errs;
    bool decreasing = false;
    StudyProtocol protocol;
};

/// m_ref = 0 selects 2 * max(m_list).
GalerkinReport galerkin_refinement_check(const ModelSpec& model, const SineField& x0,
                                         const SineField& y0, double eps, const SimParams& params,
                                         std::vector<std::size_t> m_list, std::size_t m_ref = 0);

/// Runs fn(i) for i in [0, n) on the available hardware threads. Results must be
/// written to per-index slots; reductions happen afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace msbl
