#pragma once

// Deterministic gradient descent with Armijo backtracking over the packed
// parameter vector (c1, c2, a): 5 entries in 2-D, 7 in 3-D. The trailing
// entry is always the semi-major length; `param_floor_last` keeps it
// positive after each step. No randomness anywhere: identical inputs give
// bit-identical traces.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace focifit {

struct Evaluation {
    double value = 0.0;
    std::vector<double> gradient;
};

using ObjectiveFn = std::function<Evaluation(std::span<const double>)>;
using StopPredicate = std::function<bool(std::span<const double>)>;

struct DescentConfig {
    int max_iterations = 5000;
    double grad_tolerance = 1e-8;
    double rel_obj_tolerance = 1e-12;
    double initial_step = 1.0;
    double backtrack_factor = 0.5;
    double armijo_c = 1e-4;
    /// Lower bound projected onto the trailing parameter (the semi-major
    /// length) after each step; 0 disables the projection.
    double param_floor_last = 0.0;
    /// Upper bound projected onto the trailing parameter; 0 disables it.
    /// Pinning a to a data-derived bound removes the escape route toward
    /// the objective's minimum at infinity.
    double param_ceiling_last = 0.0;
};

enum class StopReason {
    gradient_small,
    objective_stalled,
    max_iterations,
    early_stop_predicate,
};

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::gradient_small: return "gradient_small";
        case StopReason::objective_stalled: return "objective_stalled";
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::early_stop_predicate: return "early_stop_predicate";
    }
    return "unknown";
}

struct DescentTrace {
    std::vector<double> objective;  // value at start plus one entry per step
    std::vector<double> final_params;
    int iterations_used = 0;
    bool converged = false;
    StopReason stop_reason = StopReason::max_iterations;
};

namespace detail {

inline void validate(const DescentConfig& c) {
    if (c.max_iterations < 0 || !(c.grad_tolerance > 0.0) ||
        !(c.rel_obj_tolerance > 0.0) || !(c.initial_step > 0.0) ||
        !(c.armijo_c > 0.0) || !(c.backtrack_factor > 0.0) ||
        !(c.backtrack_factor < 1.0))
        throw std::invalid_argument("invalid descent configuration");
}

// Evaluator failures (a point landing exactly on a focus) are retried once
// after nudging the foci block; a second failure aborts the run.
inline Evaluation eval_with_retry(const ObjectiveFn& objective,
                                  std::vector<double>& params) {
    try {
        return objective(params);
    } catch (const std::exception& first) {
        std::vector<double> jittered = params;
        for (std::size_t i = 0; i + 1 < jittered.size(); ++i)
            jittered[i] += 1e-9 * (1.0 + std::abs(jittered[i]));
        try {
            Evaluation e = objective(jittered);
            params = jittered;
            return e;
        } catch (const std::exception& second) {
            throw std::runtime_error(
                std::string("descent aborted: evaluator failed after jitter "
                            "retry: ") +
                second.what());
        }
    }
}

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace detail

inline DescentTrace descend(const ObjectiveFn& objective,
                            std::vector<double> params,
                            const DescentConfig& config,
                            const StopPredicate& early_stop = {}) {
    detail::validate(config);
    if (params.empty()) throw std::invalid_argument("empty parameter vector");

    DescentTrace trace;
    Evaluation cur = detail::eval_with_retry(objective, params);
    if (cur.gradient.size() != params.size())
        throw std::invalid_argument("gradient size does not match parameters");
    trace.objective.push_back(cur.value);

    auto finish = [&](StopReason reason, bool converged) {
        trace.stop_reason = reason;
        trace.converged = converged;
        trace.final_params = std::move(params);
        return trace;
    };

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        if (early_stop && early_stop(params))
            return finish(StopReason::early_stop_predicate, false);

        const double gnorm = detail::norm2(cur.gradient);
        if (gnorm <= config.grad_tolerance)
            return finish(StopReason::gradient_small, true);

        // Backtracking line search along -gradient from a fresh initial step.
        bool accepted = false;
        Evaluation next;
        std::vector<double> cand(params.size());
        for (double t = config.initial_step; t >= 1e-20;
             t *= config.backtrack_factor) {
            for (std::size_t i = 0; i < params.size(); ++i)
                cand[i] = params[i] - t * cur.gradient[i];
            if (config.param_floor_last > 0.0 &&
                cand.back() < config.param_floor_last)
                cand.back() = config.param_floor_last;
            if (config.param_ceiling_last > 0.0 &&
                cand.back() > config.param_ceiling_last)
                cand.back() = config.param_ceiling_last;
            next = detail::eval_with_retry(objective, cand);
            if (next.value <= cur.value - config.armijo_c * t * gnorm * gnorm) {
                accepted = true;
                break;
            }
        }
        if (!accepted) return finish(StopReason::objective_stalled, true);

        const double drop = cur.value - next.value;
        params = cand;
        cur = std::move(next);
        trace.objective.push_back(cur.value);
        trace.iterations_used = iter;

        if (drop <= config.rel_obj_tolerance * std::max(std::abs(cur.value), 1e-300))
            return finish(StopReason::objective_stalled, true);
    }
    return finish(StopReason::max_iterations, false);
}

}  // namespace focifit
