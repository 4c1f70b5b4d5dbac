#pragma once

#include <optional>
#include <vector>

#include "msbl/coefficients.hpp"
#include "msbl/noise.hpp"
#include "msbl/spectral.hpp"

namespace msbl {

/// Exponential-Euler stepper for dY = [AY + G(x,Y)] dt + sqrt(Q2) dW2 with x frozen.
/// The same stepper advances the fast component of the coupled system in
/// rescaled time h = delta / eps.
class FrozenStepper {
public:
    FrozenStepper(const ModelSpec& model, std::size_t m, double h);

    std::size_t modes() const { return m_; }
    double step_size() const { return h_; }

    /// Caches grid values of the frozen slow state.
    void freeze(std::span<const double> x);
    /// One step in place. `noise_refine` > 1 draws that many sub-increments at
    /// addresses stream.step * refine + j and combines them exactly.
    /// `noise_sign` = -1 gives the antithetic partner path.
    void step(std::span<double> y, const NoiseStream& stream, unsigned noise_refine = 1,
              double noise_sign = 1.0);
    /// Stochastic part only: in-place add of the convolution increment.
    void add_noise(std::span<double> y, const NoiseStream& stream, unsigned noise_refine = 1,
                   double noise_sign = 1.0);

    NemytskiiWorkspace& workspace() { return ws_; }

private:
    const ModelSpec* model_;
    std::size_t m_;
    double h_;
    unsigned sub_refine_ = 0;
    std::vector<double> decay_, phi_, sd_, sub_decay_, sub_sd_;
    std::vector<double> drive_, noise_, z_;
    NemytskiiWorkspace ws_;
};

/// y' = e^{dt A} y + phi1(dt) G(x,y) + convolution increment of Q2.
SineField frozen_step(const ModelSpec& model, const SineField& x_frozen, const SineField& y,
                      double dt, const NoiseStream& stream);

struct FbarEstimate {
    SineField x;
    SineField value;
    double burn_in = 0.0;
    double window = 0.0;
    double micro_dt = 0.0;
    std::size_t batches = 0;
    std::vector<double> std_err;
};

/// Burn-in of five mixing times, 10 / (lambda_1 - L_G).
double default_burn_in(const ModelSpec& model);

/// Time average of F(x, Y_t) over [burn_in, burn_in + window] along one frozen
/// trajectory started at y = 0, with batch-means standard errors (20 batches).
FbarEstimate estimate_fbar_ergodic(const ModelSpec& model, const SineField& x, double burn_in,
                                   double window, double micro_dt, const NoiseStream& stream);

/// F1(x) + c (aI - A)^{-1} G0(x) for the linear_gaussian family.
SineField fbar_analytic(const ModelSpec& model, const SineField& x);

/// Invariant mean (aI - A)^{-1} G0(x) of the linear frozen equation.
SineField frozen_invariant_mean(const ModelSpec& model, const SineField& x);

/// c (aI - A)^{-1} (y - mu_x) for the linear_gaussian family.
SineField poisson_corrector_linear(const ModelSpec& model, const SineField& x, const SineField& y);

struct CorrectorOptions {
    bool antithetic = true;
    /// Centering value; defaults to fbar_analytic when available, else an ergodic estimate.
    std::optional<SineField> fbar;
};

/// Trapezoid quadrature over [0, t_max] of the Monte-Carlo mean of F(x, Y_t^{x,y}) - Fbar(x).
/// Path p uses noise path id stream.path_id + p (antithetic pairs share an id).
SineField poisson_corrector_quadrature(const ModelSpec& model, const SineField& x,
                                       const SineField& y, double t_max, std::size_t n_paths,
                                       double micro_dt, const NoiseStream& stream,
                                       const CorrectorOptions& opts = {});

}  // namespace msbl
