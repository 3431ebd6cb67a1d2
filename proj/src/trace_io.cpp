#include "sgdlab/trace_io.hpp"

#include <cstdio>

namespace sgdlab {

std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "t,fx,norm_x,step\n";
  for (int t = 1; t <= trace.T + 1; ++t) {
    os << t << ',' << fmt17(trace.f_at(t)) << ',' << fmt17(norm(trace.x_at(t))) << ','
       << fmt17(trace.schedule.value(t)) << '\n';
  }
}

void write_trace_vectors(std::ostream& os, const RunTrace& trace) {
  for (int t = 1; t <= trace.T + 1; ++t) {
    const Vec& x = trace.x_at(t);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i) os << ' ';
      os << fmt17(x[i]);
    }
    os << '\n';
  }
}

void write_cert_csv(std::ostream& os, const std::vector<CertRow>& rows) {
  os << "check,index,lhs,rhs,pass\n";
  for (const CertRow& r : rows) {
    os << r.check << ',' << r.index << ',' << fmt17(r.lhs) << ',' << fmt17(r.rhs) << ','
       << (r.pass ? 1 : 0) << '\n';
  }
}

}  // namespace sgdlab
