#include "tlsnoise/dielectric.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <string>

#include "tlsnoise/constants.hpp"
#include "tlsnoise/csv.hpp"
#include "tlsnoise/errors.hpp"

namespace tlsnoise::dielectric {

namespace c = tlsnoise::constants;

Region parse_region(std::string_view label) {
  if (label == "helium") return Region::helium;
  if (label == "substrate") return Region::substrate;
  if (label == "other") return Region::other;
  throw UsageError("unknown region '" + std::string(label) + "' (expected helium|substrate|other)");
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::helium: return "helium";
    case Region::substrate: return "substrate";
    case Region::other: return "other";
  }
  return "other";
}

void FieldSampleSet::validate() const {
  if (samples.empty()) throw DomainError("field sample set is empty");
  for (const auto& s : samples) {
    if (!(s.e2 >= 0.0)) throw DomainError("field sample |E|^2 must be >= 0");
    if (!(s.dv > 0.0)) throw DomainError("field sample volume must be positive");
    if (!(s.eps >= 1.0)) throw DomainError("field sample permittivity must be >= 1");
  }
}

double filling_factor(const FieldSampleSet& fields, Region region) {
  fields.validate();
  double part = 0.0;
  double total = 0.0;
  bool any = false;
  for (const auto& s : fields.samples) {
    const double w = s.eps * s.e2 * s.dv;
    total += w;
    if (s.region == region) {
      part += w;
      any = true;
    }
  }
  if (!any) throw DomainError("no field samples in region " + std::string(to_string(region)));
  if (!(total > 0.0)) throw DomainError("total electric energy is zero");
  return part / total;
}

double fill_freq_shift(double nu0, double filling, double eps_r) {
  if (!(eps_r >= 1.0)) throw DomainError("permittivity must be >= 1");
  if (!(filling > 0.0 && filling <= 1.0)) throw DomainError("filling factor must lie in (0, 1]");
  return -0.5 * filling * (eps_r - 1.0) * nu0;
}

double pressure_eps(double eps_svp, double density_ratio) {
  if (!(density_ratio > 0.0)) throw DomainError("density ratio must be positive");
  if (!(eps_svp >= 1.0)) throw DomainError("permittivity must be >= 1");
  const double cm = density_ratio * (eps_svp - 1.0) / (eps_svp + 2.0);
  if (cm >= 1.0) throw DomainError("Clausius-Mossotti factor reaches 1: non-physical density");
  return (1.0 + 2.0 * cm) / (1.0 - cm);
}

LossBound loss_tangent_bound(double qi_full, double qi_empty, double filling) {
  if (!(qi_full > 0.0) || !(qi_empty > 0.0)) throw DomainError("quality factors must be positive");
  if (!(filling > 0.0)) throw DomainError("filling factor must be positive");
  LossBound b;
  b.f_tan_delta = std::abs(1.0 / qi_full - 1.0 / qi_empty);
  b.tan_delta = b.f_tan_delta / filling;
  return b;
}

double mean_q(std::span<const double> q) {
  if (q.empty()) throw DomainError("no quality factors to average");
  double loss = 0.0;
  for (double v : q) {
    if (!(v > 0.0)) throw DomainError("quality factors must be positive");
    loss += 1.0 / v;
  }
  return static_cast<double>(q.size()) / loss;
}

double t1_bound(double nu_qubit, double filling, double tan_delta) {
  if (!(nu_qubit > 0.0) || !(filling > 0.0) || !(tan_delta > 0.0)) {
    throw DomainError("T1 bound needs positive frequency, filling and loss tangent");
  }
  return 1.0 / (nu_qubit * filling * tan_delta);
}

double HyperfineModel::equivalent_temperature() const { return splitting / c::kelvin_to_hz; }

EsrIntensity esr_peak_ratio(double temperature, const HyperfineModel& model) {
  if (!(temperature > 0.0)) throw DomainError("ESR thermometry needs T > 0");
  if (!(model.splitting > 0.0)) throw DomainError("hyperfine splitting must be positive");
  EsrIntensity out;
  const double x = model.equivalent_temperature() / temperature;
  out.ratio = std::exp(-x);
  out.normalized = 1.0 / (1.0 + std::exp(x));
  return out;
}

GapResult he3_bcs_gap(double temperature, double t_c) {
  if (temperature < 0.0) throw DomainError("temperature must be >= 0");
  if (!(t_c > 0.0)) throw DomainError("critical temperature must be positive");
  if (temperature >= t_c) return {0.0, temperature > t_c};
  return {3.06 * c::kelvin_to_hz * t_c * std::sqrt(1.0 - temperature / t_c), false};
}

void ParticipationTable::validate() const {
  if (thickness_nm.empty() || thickness_nm.size() != participation.size()) {
    throw DomainError("participation table is empty or ragged");
  }
  for (std::size_t i = 1; i < thickness_nm.size(); ++i) {
    if (!(thickness_nm[i] > thickness_nm[i - 1])) {
      throw DomainError("participation table thicknesses must increase");
    }
  }
}

double ParticipationTable::at(double t) const {
  validate();
  if (t <= thickness_nm.front()) return participation.front();
  if (t >= thickness_nm.back()) return participation.back();
  const auto it = std::upper_bound(thickness_nm.begin(), thickness_nm.end(), t);
  const auto i = static_cast<std::size_t>(it - thickness_nm.begin());
  const double w = (t - thickness_nm[i - 1]) / (thickness_nm[i] - thickness_nm[i - 1]);
  return participation[i - 1] + w * (participation[i] - participation[i - 1]);
}

double film_freq_shift(double full_fill_shift, double participation) {
  if (participation < 0.0) throw DomainError("participation must be >= 0");
  return participation * full_fill_shift;
}

namespace {

template <class Row>
void for_each_row(std::istream& in, std::string_view header, std::size_t columns, Row row) {
  std::string line;
  while (std::getline(in, line)) {
    const auto body = csv::trim(line);
    if (body.empty() || body.front() == '#' || body == header) continue;
    const auto fields = csv::split(body);
    if (fields.size() != columns) {
      throw UsageError("expected " + std::to_string(columns) + " columns: " + std::string(body));
    }
    row(fields);
  }
}

}  // namespace

FieldSampleSet read_field_samples_csv(std::istream& in) {
  FieldSampleSet set;
  for_each_row(in, "e2,eps,dv,region", 4, [&](const auto& f) {
    set.samples.push_back({csv::parse_double(f[0], "e2"), csv::parse_double(f[1], "eps"),
                           csv::parse_double(f[2], "dv"), parse_region(f[3])});
  });
  set.validate();
  return set;
}

ParticipationTable read_participation_csv(std::istream& in) {
  ParticipationTable t;
  for_each_row(in, "thickness_nm,participation", 2, [&](const auto& f) {
    t.thickness_nm.push_back(csv::parse_double(f[0], "thickness_nm"));
    t.participation.push_back(csv::parse_double(f[1], "participation"));
  });
  t.validate();
  return t;
}

}  // namespace tlsnoise::dielectric
