#pragma once

#include <stdexcept>
#include <string>

#include "braidopt/experiments.hpp"
#include "braidopt/model.hpp"
#include "braidopt/pontryagin.hpp"
#include "braidopt/propagator.hpp"
#include "braidopt/results.hpp"

namespace braidopt {

// Malformed input files; the message carries the offending file and, where
// available, line/field diagnostics.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Protocol JSON document:
//   {"total_time": .., "segments": [{"duration": .., "delta": [d1,d2,d3]}],
//    "endpoint": [0,0,1], "metadata": {..}}
// Values round-trip at full double precision.
std::string protocol_to_json(const Protocol& protocol);
Protocol protocol_from_json(const std::string& text,
                            const std::string& origin = "<memory>");
void save_protocol(const Protocol& protocol, const std::string& path);
Protocol load_protocol(const std::string& path);

// CSV columns: t, 16 real parts, 16 imaginary parts (column-major entry
// order), full double precision.  stride > 1 downsamples; the final state is
// always kept.
void write_trajectory_csv(const Trajectory& trajectory,
                          const std::string& path, int stride = 1);

// CSV columns: t, F1..F3, G1..G3, d1..d3 (continuous candidates, nan where
// undefined), branch1..branch3.
void write_switching_csv(const SwitchingRecord& record,
                         const std::string& path);

void write_sweep_csv(const SweepResult& sweep, const std::string& path);
// Protocol payloads are not reloaded, only the tabulated columns.
SweepResult read_sweep_csv(const std::string& path);

void write_baseline_csv(const std::vector<BaselineRow>& rows,
                        const std::string& path);

void write_histogram_csv(const HistogramResult& hist, const std::string& path);
void write_histogram_minima_csv(const HistogramResult& hist,
                                const std::string& path);

void write_extrapolation_csv(const ExtrapolationResult& fit,
                             const std::string& path);

// Appends a (tau, w, seed, best_cost, protocol_file) row, creating the file
// with a header when absent.
void append_anneal_result_csv(const std::string& path, double tau, double w,
                              std::uint64_t seed, double best_cost,
                              const std::string& protocol_file);

std::string format_full(double v);  // shortest 17-significant-digit form

}  // namespace braidopt
