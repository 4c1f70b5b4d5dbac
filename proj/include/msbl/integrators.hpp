#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "msbl/coefficients.hpp"
#include "msbl/frozen.hpp"
#include "msbl/spectral.hpp"

namespace msbl {

/// Which fast state drives the slow drift over a macro step.
enum class SlowDrive {
    substep_average,  // trapezoid average of F(x, Y) over the fast substep nodes
    midpoint,         // F(x, Y) at the state after half of the substeps
};

struct SimParams {
    double eps = 1.0;
    double T = 0.5;
    double macro_dt = 1e-3;
    /// Fast substep target is kappa * eps (real time).
    double kappa = 0.025;
    std::size_t m = 32;
    std::size_t n_paths = 100;
    std::uint64_t master_seed = 20240611;
    SlowDrive drive = SlowDrive::substep_average;
    /// Fixes the substep count instead of deriving it from kappa (step-halving probes).
    std::size_t n_sub_override = 0;
    /// Each macro/fast step draws this many sub-increments (step-halving probes).
    unsigned noise_refine = 1;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
    std::size_t n_steps() const;
    /// ceil(macro_dt / (kappa eps)) unless overridden. Throws beyond 10^7.
    std::size_t n_sub() const;
};

enum class TrajectoryKind { slow_eps, fast_eps, averaged };

struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::slow_eps;
    std::vector<double> times;
    std::vector<SineField> states;
};

/// Fixed-order state of one coupled path, advanced macro step by macro step.
class CoupledStepper {
public:
    CoupledStepper(const ModelSpec& model, const SimParams& params, std::uint32_t path_id);

    /// Advances (x, y) over macro step `macro_index`.
    void step(std::span<double> x, std::span<double> y, std::uint64_t macro_index);

    std::size_t n_sub() const { return n_sub_; }

private:
    const ModelSpec* model_;
    SimParams params_;
    std::size_t m_;
    std::size_t n_sub_;
    NoiseStream w1_, w2_;
    std::vector<double> decay_, phi_, sd_, sub_decay_, sub_sd_;
    std::vector<double> drive_, fbuf_, burgers_, noise_, z_, ymid_;
    FrozenStepper fast_;
};

/// Source of the averaged drift for the averaged equation.
struct FbarAnalytic {};
/// Nearest-neighbour (L2) lookup in precomputed ergodic estimates.
struct FbarTable {
    std::vector<FbarEstimate> entries;
};
/// Fresh ergodic estimate at every macro step.
struct FbarOnline {
    double burn_in = 0.0;
    double window = 20.0;
    double micro_dt = 1e-3;
};
using FbarMode = std::variant<FbarAnalytic, FbarTable, FbarOnline>;

class AveragedStepper {
public:
    AveragedStepper(const ModelSpec& model, const SimParams& params, FbarMode mode,
                    std::uint32_t path_id);

    void step(std::span<double> x, std::uint64_t macro_index);

private:
    void fbar(std::span<const double> x, std::span<double> out, std::uint64_t macro_index);

    const ModelSpec* model_;
    SimParams params_;
    FbarMode mode_;
    std::size_t m_;
    NoiseStream w1_;
    std::vector<double> decay_, phi_, sd_, sub_decay_, sub_sd_;
    std::vector<double> drive_, fb_, g0_, burgers_, noise_, z_;
    NemytskiiWorkspace ws_;
};

/// Adds the exact stochastic convolution of Q1 over one macro step, with optional
/// sub-increment refinement; shared by the coupled and averaged steppers so both
/// consume identical W1 draws.
void add_slow_noise(const CovSpec& q1, std::span<double> x, const NoiseStream& w1,
                    std::uint64_t macro_index, unsigned refine, std::span<const double> sd,
                    std::span<const double> sub_decay, std::span<const double> sub_sd,
                    std::span<double> scratch, std::span<double> z);

/// Slow and fast trajectories on the macro grid.
std::pair<Trajectory, Trajectory> simulate_coupled(const SineField& x0, const SineField& y0,
                                                   const ModelSpec& model, const SimParams& params,
                                                   std::uint32_t path_id);

Trajectory simulate_averaged(const SineField& x0, const ModelSpec& model, const SimParams& params,
                             const FbarMode& mode, std::uint32_t path_id);

}  // namespace msbl
