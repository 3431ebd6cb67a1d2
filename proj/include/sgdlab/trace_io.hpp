#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sgdlab/sgd.hpp"

namespace sgdlab {

// Shortest-round-trip style formatting at 17 significant digits, so CSV
// reals reload bit-exactly.
std::string fmt17(double v);

// Line-oriented CSV `t,fx,norm_x,step`, one row per iterate t = 1..T+1.
void write_trace_csv(std::ostream& os, const RunTrace& trace);

// Full-vector dump: one line per iterate, space-separated coordinates.
void write_trace_vectors(std::ostream& os, const RunTrace& trace);

// One row of a certificate report, emitted as `check,index,lhs,rhs,pass`.
struct CertRow {
  std::string check;
  int index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

void write_cert_csv(std::ostream& os, const std::vector<CertRow>& rows);

}  // namespace sgdlab
