#include "spotvol/io.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

#include "spotvol/error.hpp"

namespace spotvol {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
  }
  return out;
}

bool parse_number(const std::string& s, double& value) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

ReturnSeries parse_series_csv(std::istream& in, SeriesKind kind, double fallback_delta_n) {
  std::vector<double> times;
  std::vector<double> values;
  std::string line;
  bool first_row = true;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (first_row) {
      first_row = false;
      columns = cells.size();
      if (columns < 1 || columns > 2) throw ParameterError("input CSV must have 1 or 2 columns");
      double probe;
      if (!parse_number(cells.back(), probe)) {
        if (kind == SeriesKind::automatic) {
          kind = cells.back() == "price" ? SeriesKind::price : SeriesKind::increment;
        }
        continue;
      }
    }
    if (cells.size() != columns) {
      throw ParameterError("input CSV line " + std::to_string(line_no) + ": inconsistent column count");
    }
    double v;
    if (!parse_number(cells.back(), v)) {
      throw ParameterError("input CSV line " + std::to_string(line_no) + ": not a number");
    }
    values.push_back(v);
    if (columns == 2) {
      double t;
      if (!parse_number(cells.front(), t)) {
        throw ParameterError("input CSV line " + std::to_string(line_no) + ": bad time value");
      }
      times.push_back(t);
    }
  }
  if (kind == SeriesKind::automatic) kind = SeriesKind::increment;

  ReturnSeries r;
  if (kind == SeriesKind::price) {
    if (values.size() < 2) throw ParameterError("price input needs at least two rows");
    r.increments.resize(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i) r.increments[i - 1] = values[i] - values[i - 1];
  } else {
    r.increments = std::move(values);
  }
  if (r.increments.empty()) throw ParameterError("input CSV holds no data");

  if (times.size() >= 2) {
    r.delta_n = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    // On a regular grid the first spacing is exact and reproduces the writer's step.
    const double first = times[1] - times[0];
    if (std::abs(first - r.delta_n) <= 1e-9 * r.delta_n) r.delta_n = first;
  } else {
    r.delta_n = fallback_delta_n;
  }
  if (!(r.delta_n > 0.0)) throw ParameterError("could not determine a positive sampling interval");
  r.horizon = static_cast<double>(r.increments.size()) * r.delta_n;
  return r;
}

ReturnSeries read_series_csv(const std::filesystem::path& file, SeriesKind kind,
                             double fallback_delta_n) {
  std::ifstream in(file);
  if (!in) throw ParameterError("cannot open input file " + file.string());
  return parse_series_csv(in, kind, fallback_delta_n);
}

void write_column_csv(const std::filesystem::path& file, const std::vector<double>& times,
                      const std::vector<double>& values, const std::string& value_name) {
  std::ofstream out(file);
  if (!out) throw ParameterError("cannot write " + file.string());
  out << "time," << value_name << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << format_double(times[i]) << ',' << format_double(values[i]) << '\n';
  }
}

void write_returns_csv(const std::filesystem::path& file, const ReturnSeries& r) {
  std::vector<double> times(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) times[i] = static_cast<double>(i + 1) * r.delta_n;
  write_column_csv(file, times, r.increments, "increment");
}

void export_path(const std::filesystem::path& prefix, const SimulatedPath& path,
                 const ModelConfig& cfg) {
  const std::string base = prefix.string();
  write_returns_csv(base + "_returns.csv", path.returns);

  const std::size_t n = path.returns.size();
  const std::size_t m = cfg.steps_per_obs();
  std::vector<double> times(n + 1);
  std::vector<double> prices(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    times[i] = static_cast<double>(i) * path.returns.delta_n;
    prices[i] = path.x_fine[i * m];
  }
  write_column_csv(base + "_price.csv", times, prices, "price");
  write_column_csv(base + "_sigma.csv", times, path.sigma_at_obs, "sigma");

  std::ofstream sidecar(base + ".json");
  if (!sidecar) throw ParameterError("cannot write " + base + ".json");
  sidecar << nlohmann::json(cfg).dump(2) << '\n';
}

}  // namespace spotvol

namespace nlohmann {

void adl_serializer<spotvol::ModelConfig>::to_json(json& j, const spotvol::ModelConfig& cfg) {
  using spotvol::DriftSpec;
  using spotvol::VolSpec;
  json drift;
  switch (cfg.drift.kind) {
    case DriftSpec::Kind::zero: drift = {{"kind", "zero"}}; break;
    case DriftSpec::Kind::constant: drift = {{"kind", "constant"}, {"value", cfg.drift.value}}; break;
    case DriftSpec::Kind::function:
      drift = {{"kind", "function"}, {"id", cfg.drift.id}, {"value", cfg.drift.value}};
      break;
  }
  json vol;
  switch (cfg.vol.kind) {
    case VolSpec::Kind::two_factor_cir: {
      const auto& c = cfg.vol.cir;
      vol = {{"kind", "two_factor_cir"},
             {"kappa1", c.kappa1}, {"theta1", c.theta1}, {"xi1", c.xi1},
             {"kappa2", c.kappa2}, {"theta2", c.theta2}, {"xi2", c.xi2}};
      break;
    }
    case VolSpec::Kind::constant: vol = {{"kind", "constant"}, {"value", cfg.vol.value}}; break;
    case VolSpec::Kind::function:
      vol = {{"kind", "function"}, {"id", cfg.vol.id}, {"value", cfg.vol.value}};
      break;
  }
  j = json{{"beta", cfg.beta},       {"horizon", cfg.horizon}, {"fine_dt", cfg.fine_dt},
           {"obs_dt", cfg.obs_dt},   {"drift", drift},         {"vol", vol},
           {"seed", cfg.seed},       {"replicate", cfg.replicate}};
}

void adl_serializer<spotvol::ModelConfig>::from_json(const json& j, spotvol::ModelConfig& cfg) {
  using spotvol::DriftSpec;
  using spotvol::VolSpec;
  cfg = spotvol::ModelConfig{};
  cfg.beta = j.value("beta", cfg.beta);
  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.fine_dt = j.value("fine_dt", cfg.fine_dt);
  cfg.obs_dt = j.value("obs_dt", cfg.obs_dt);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.replicate = j.value("replicate", cfg.replicate);
  if (j.contains("drift")) {
    const auto& d = j.at("drift");
    const std::string kind = d.value("kind", "zero");
    if (kind == "zero") cfg.drift = DriftSpec::zero();
    else if (kind == "constant") cfg.drift = DriftSpec::constant(d.at("value").get<double>());
    else if (kind == "function") cfg.drift = DriftSpec::function(d.at("id").get<std::string>(), d.value("value", 0.0));
    else throw spotvol::ParameterError("unknown drift kind '" + kind + "'");
  }
  if (j.contains("vol")) {
    const auto& v = j.at("vol");
    const std::string kind = v.value("kind", "two_factor_cir");
    if (kind == "two_factor_cir") {
      spotvol::CirParams c;
      c.kappa1 = v.value("kappa1", c.kappa1);
      c.theta1 = v.value("theta1", c.theta1);
      c.xi1 = v.value("xi1", c.xi1);
      c.kappa2 = v.value("kappa2", c.kappa2);
      c.theta2 = v.value("theta2", c.theta2);
      c.xi2 = v.value("xi2", c.xi2);
      cfg.vol = VolSpec::two_factor_cir(c);
    } else if (kind == "constant") {
      cfg.vol = VolSpec::constant(v.at("value").get<double>());
    } else if (kind == "function") {
      cfg.vol = VolSpec::function(v.at("id").get<std::string>(), v.value("value", 1.0));
    } else {
      throw spotvol::ParameterError("unknown vol kind '" + kind + "'");
    }
  }
}

}  // namespace nlohmann
