#include <istream>
#include <ostream>
#include <string>

#include "tlsnoise/bath.hpp"
#include "tlsnoise/csv.hpp"

namespace tlsnoise::bath {

void write_trace_csv(std::ostream& out, const FrequencyTrace& trace) {
  out << "# dt=" << csv::fmt(trace.dt) << " nu_mean=" << csv::fmt(trace.nu_mean)
      << " seed=" << trace.seed << '\n';
  out << "time,y\n";
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const double t = trace.start_time + static_cast<double>(k) * trace.dt;
    out << csv::fmt(t) << ',' << csv::fmt(trace.samples[k]) << '\n';
  }
}

FrequencyTrace read_trace_csv(std::istream& in) {
  FrequencyTrace trace;
  std::string line;
  bool have_dt = false;
  bool first_row = true;
  while (std::getline(in, line)) {
    const auto body = csv::trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      for (auto tok : csv::split(body.substr(1), ' ')) {
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) continue;
        const auto key = tok.substr(0, eq);
        const auto val = tok.substr(eq + 1);
        if (key == "dt") {
          trace.dt = csv::parse_double(val, "trace header dt");
          have_dt = true;
        } else if (key == "nu_mean") {
          trace.nu_mean = csv::parse_double(val, "trace header nu_mean");
        } else if (key == "seed") {
          trace.seed = std::stoull(std::string(val));
        }
      }
      continue;
    }
    if (body == "time,y") continue;
    const auto fields = csv::split(body);
    if (fields.size() != 2) throw UsageError("trace row needs two columns: " + std::string(body));
    const double t = csv::parse_double(fields[0], "trace time");
    if (first_row) {
      trace.start_time = t;
      first_row = false;
    }
    trace.samples.push_back(csv::parse_double(fields[1], "trace y"));
  }
  if (!have_dt) throw UsageError("trace CSV lacks the '# dt=...' header");
  trace.validate();
  return trace;
}

}  // namespace tlsnoise::bath
