#pragma once

// Per-trial trace rows and solve outputs. Every inner-loop trial emits one
// row; the row with inner == -1 carries the state at the start of an outer
// iteration (so audits can difference potentials without external state).
// CSV schema is fixed: k,inner,estimate,alpha,vnorm,Fmu,f,feas,accepted,ms

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace ahb {

struct TraceRow {
  long k = 0;          // outer iteration
  long inner = 0;      // trial index within the iteration, -1 for the iterate row
  double estimate = 0; // Lipschitz estimate in force for the trial
  double alpha = 0;    // step length
  double vnorm = 0;    // |v|_x of the current direction
  double Fmu = 0;      // potential at the trial point (iterate row: at x_k)
  double f = 0;        // objective at the trial point
  double feas = 0;     // |A x - b| at the trial point
  bool accepted = false;
  double ms = 0;       // wall time since run start
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  // x is the trial point the row describes.
  virtual void row(const TraceRow& r, const Vector& x) = 0;
};

class NullTraceSink final : public TraceSink {
 public:
  void row(const TraceRow&, const Vector&) override {}
};

class MemoryTraceSink final : public TraceSink {
 public:
  explicit MemoryTraceSink(bool keep_points = false) : keep_points_(keep_points) {}
  void row(const TraceRow& r, const Vector& x) override {
    rows.push_back(r);
    if (keep_points_) points.push_back(x);
  }
  std::vector<TraceRow> rows;
  std::vector<Vector> points;

 private:
  bool keep_points_;
};

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvTraceSink final : public TraceSink {
 public:
  explicit CsvTraceSink(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw InvalidData("CsvTraceSink: cannot open " + path);
    out_ << "k,inner,estimate,alpha,vnorm,Fmu,f,feas,accepted,ms\n";
  }
  void row(const TraceRow& r, const Vector&) override {
    out_ << r.k << ',' << r.inner << ',' << format_g17(r.estimate) << ','
         << format_g17(r.alpha) << ',' << format_g17(r.vnorm) << ','
         << format_g17(r.Fmu) << ',' << format_g17(r.f) << ',' << format_g17(r.feas)
         << ',' << (r.accepted ? 1 : 0) << ',' << format_g17(r.ms) << '\n';
  }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

enum class SolveStatus { Converged, MaxIterations, Failure };

struct SolveOutput {
  Vector x;
  Vector y;
  Vector s; // f gradient minus A^T y at x, recomputed at output time
  double L_final = 0.0;       // estimate carried out of the last iteration
  double L_last_accepted = 0.0; // estimate accepted by the last line search
  double L_max_accepted = 0.0;  // largest estimate any line search accepted
  SolveStatus status = SolveStatus::Failure;
  std::string failure_reason;
  long iterations = 0;   // committed outer steps
  long directions = 0;   // direction computations (>= iterations)
  long inner_trials = 0; // line-search trials across the run
  double mu = 0.0;
  double eps = 0.0;
  double final_vnorm = 0.0;
  double final_threshold = 0.0;
  double prev_vnorm = 0.0;     // second-order runs: previous direction record
  double prev_threshold = 0.0;
  double f_final = 0.0;
  double Fmu_final = 0.0;
  double feas_residual = 0.0;
  double best_f_seen = 0.0; // smallest accepted objective value along the run
};

} // namespace ahb
