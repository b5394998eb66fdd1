#pragma once

#include <stdexcept>
#include <string>

namespace thermolap {

// Error taxonomy. Validation errors map to CLI exit code 2,
// numerical errors to exit code 3.
enum class errc {
    // input / contract violations
    missing_column,
    non_monotone_time,
    non_finite_value,
    empty_series,
    horizon_exceeded,
    grid_mismatch,
    non_positive_input,
    non_positive_pressure,
    incomplete_cycle,
    too_few_cycles,
    not_coasting,
    volume_exceeds_max,
    missing_reference,
    out_of_bracket,
    empty_histogram,
    degenerate_temperature_difference,
    zero_area,
    too_few_samples,
    disconnected_node,
    dangling_patch,
    unreachable_state,
    zero_mean_htc,
    bad_config,
    io_failure,
    // numerical failures
    singular_system,
    solver_divergence,
};

constexpr bool is_numerical(errc c) {
    return c == errc::singular_system || c == errc::solver_divergence;
}

constexpr const char* errc_name(errc c) {
    switch (c) {
        case errc::missing_column: return "MissingColumn";
        case errc::non_monotone_time: return "NonMonotoneTime";
        case errc::non_finite_value: return "NonFiniteValue";
        case errc::empty_series: return "EmptySeries";
        case errc::horizon_exceeded: return "HorizonExceeded";
        case errc::grid_mismatch: return "GridMismatch";
        case errc::non_positive_input: return "NonPositiveInput";
        case errc::non_positive_pressure: return "NonPositivePressure";
        case errc::incomplete_cycle: return "IncompleteCycle";
        case errc::too_few_cycles: return "TooFewCycles";
        case errc::not_coasting: return "NotCoasting";
        case errc::volume_exceeds_max: return "VolumeExceedsMax";
        case errc::missing_reference: return "MissingReference";
        case errc::out_of_bracket: return "OutOfBracket";
        case errc::empty_histogram: return "EmptyHistogram";
        case errc::degenerate_temperature_difference: return "DegenerateTemperatureDifference";
        case errc::zero_area: return "ZeroArea";
        case errc::too_few_samples: return "TooFewSamples";
        case errc::disconnected_node: return "DisconnectedNode";
        case errc::dangling_patch: return "DanglingPatch";
        case errc::unreachable_state: return "UnreachableState";
        case errc::zero_mean_htc: return "ZeroMeanHtc";
        case errc::bad_config: return "BadConfig";
        case errc::io_failure: return "IoFailure";
        case errc::singular_system: return "SingularSystem";
        case errc::solver_divergence: return "SolverDivergence";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }
    int exit_code() const noexcept { return is_numerical(code_) ? 3 : 2; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace thermolap
