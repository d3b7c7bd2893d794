#include "surftopo/analytic.hpp"

#include "surftopo/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace surftopo {

void MachiningParams::validate() const {
  if (!(std::abs(theta_n_deg) < 90.0) || !(std::abs(theta_t_deg) < 90.0)) {
    throw DomainError("machining params: angles must lie in (-90, 90) deg");
  }
  if (!(h_c > 0.0)) throw DomainError("machining params: scallop height must be positive");
  if (!(f_z > 0.0)) throw DomainError("machining params: feed per tooth must be positive");
  if (!(v_f > 0.0)) throw DomainError("machining params: feedrate must be positive");
  if (stepover && !(*stepover > 0.0)) throw DomainError("machining params: stepover must be positive");
}

double predict_sz(double f_z, double h_c, double r_eq, double r, SzBranch branch) {
  if (!(f_z > 0.0 && h_c > 0.0 && r_eq > 0.0 && r > 0.0)) {
    throw DomainError("predict_sz: all inputs must be positive");
  }
  const double feed = f_z * f_z / (8.0 * r);
  const bool large_corner = r > std::sqrt(8.0 * h_c * r_eq);
  const bool add_scallop = branch == SzBranch::kAsPrinted ? !large_corner : large_corner;
  return add_scallop ? h_c + feed : feed;
}

double stepover_from_scallop(double h_c, double r_eq) {
  if (!(h_c > 0.0) || !(r_eq > 0.0) || !(h_c < r_eq)) {
    throw DomainError("stepover_from_scallop: requires 0 < h_c < Req");
  }
  return std::sqrt(8.0 * h_c * r_eq);
}

ErrorStats analytic_vs_sim_error(std::span<const double> analytic, std::span<const double> simulated) {
  if (analytic.empty()) throw DomainError("analytic_vs_sim_error: empty design");
  if (analytic.size() != simulated.size()) {
    throw DomainError("analytic_vs_sim_error: columns have different lengths");
  }
  const auto n = static_cast<double>(analytic.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) sum += std::abs(analytic[k] - simulated[k]);
  ErrorStats e;
  e.mean_abs_error = sum / n;
  double var = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double d = std::abs(analytic[k] - simulated[k]) - e.mean_abs_error;
    var += d * d;
  }
  e.std_dev = std::sqrt(var / n);
  return e;
}

std::vector<double> DesignTable::column(const std::string& name) const {
  const auto it = std::find(response_names.begin(), response_names.end(), name);
  if (it == response_names.end()) throw DomainError("design table: no response column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - response_names.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.responses.at(c));
  return out;
}

DesignTable full_factorial(const std::array<std::vector<double>, kFactorCount>& levels) {
  DesignTable d;
  for (const auto& l : levels) {
    if (l.empty()) throw DomainError("full_factorial: every factor needs at least one level");
  }
  for (double a : levels[0]) {
    for (double b : levels[1]) {
      for (double c : levels[2]) {
        for (double e : levels[3]) d.rows.push_back({{a, b, c, e}, {}});
      }
    }
  }
  return d;
}

namespace {

bool same_level(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

std::vector<double> distinct_levels(const DesignTable& d, std::size_t f) {
  std::vector<double> out;
  for (const auto& row : d.rows) {
    const double v = row.levels[f];
    if (std::none_of(out.begin(), out.end(), [&](double x) { return same_level(x, v); })) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t level_index(const std::vector<double>& levels, double v) {
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (same_level(levels[k], v)) return k;
  }
  return levels.size();
}

double coded(const std::vector<double>& levels, double v) {
  if (levels.size() < 2) return 0.0;
  const std::size_t k = level_index(levels, v);
  if (k == 0) return -1.0;
  if (k + 1 == levels.size()) return 1.0;
  return 0.0;
}

void check_balanced(const DesignTable& d, const std::array<std::vector<double>, kFactorCount>& levels) {
  std::map<std::array<std::size_t, kFactorCount>, std::size_t> counts;
  std::size_t cells = 1;
  for (std::size_t f = 0; f < kFactorCount; ++f) {
    if (levels[f].size() > 3) {
      throw DomainError("factor_effects: factors must have 1 to 3 levels");
    }
    cells *= levels[f].size();
  }
  for (const auto& row : d.rows) {
    std::array<std::size_t, kFactorCount> key{};
    for (std::size_t f = 0; f < kFactorCount; ++f) key[f] = level_index(levels[f], row.levels[f]);
    ++counts[key];
  }
  if (counts.size() != cells) throw DomainError("factor_effects: design is not a full factorial");
  const std::size_t rep = counts.begin()->second;
  for (const auto& [key, n] : counts) {
    if (n != rep) throw DomainError("factor_effects: design is unbalanced");
  }
}

}  // namespace

double EffectTable::fitted(const DesignTable& design, std::size_t row, std::size_t response) const {
  const ParameterEffects& p = rows.at(response);
  double v = p.mean;
  for (std::size_t f = 0; f < kFactorCount; ++f) {
    v += p.effects[f] * coded(distinct_levels(design, f), design.rows.at(row).levels[f]);
  }
  return v;
}

EffectTable factor_effects(const DesignTable& design) {
  if (design.rows.empty()) throw DomainError("factor_effects: empty design");
  std::array<std::vector<double>, kFactorCount> levels;
  for (std::size_t f = 0; f < kFactorCount; ++f) levels[f] = distinct_levels(design, f);
  check_balanced(design, levels);
  EffectTable table;
  for (std::size_t c = 0; c < design.response_names.size(); ++c) {
    ParameterEffects p;
    p.name = design.response_names[c];
    double sum = 0.0;
    for (const auto& row : design.rows) sum += row.responses.at(c);
    p.mean = sum / static_cast<double>(design.rows.size());
    for (std::size_t f = 0; f < kFactorCount; ++f) {
      if (levels[f].size() < 2) continue;
      double hi = 0.0, lo = 0.0;
      std::size_t nhi = 0, nlo = 0;
      for (const auto& row : design.rows) {
        const double x = coded(levels[f], row.levels[f]);
        if (x > 0.0) {
          hi += row.responses[c];
          ++nhi;
        } else if (x < 0.0) {
          lo += row.responses[c];
          ++nlo;
        }
      }
      p.effects[f] = 0.5 * (hi / static_cast<double>(nhi) - lo / static_cast<double>(nlo));
    }
    table.rows.push_back(p);
  }
  return table;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s, const std::string& source, std::size_t line) {
  if (s == "nan" || s.rfind("undef", 0) == 0) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(source + ":" + std::to_string(line) + ": invalid number '" + s + "'");
  }
  return v;
}

}  // namespace

DesignTable read_design_csv(std::istream& in, const std::string& source) {
  static const std::array<std::string, kFactorCount> kFactorColumns{"yaw_deg", "tilt_deg", "hc_mm",
                                                                   "vf_m_per_min"};
  DesignTable d;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (!header) {
      if (cells.size() < kFactorCount) throw ParseError(source + ": header has too few columns");
      for (std::size_t f = 0; f < kFactorCount; ++f) {
        if (cells[f] != kFactorColumns[f]) {
          throw ParseError(source + ": expected column '" + kFactorColumns[f] + "', found '" + cells[f] + "'");
        }
      }
      d.response_names.assign(cells.begin() + kFactorCount, cells.end());
      header = true;
      continue;
    }
    if (cells.size() != kFactorCount + d.response_names.size()) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(kFactorCount + d.response_names.size()) + " columns");
    }
    DesignRow row;
    for (std::size_t f = 0; f < kFactorCount; ++f) row.levels[f] = parse_cell(cells[f], source, lineno);
    for (std::size_t c = kFactorCount; c < cells.size(); ++c) row.responses.push_back(parse_cell(cells[c], source, lineno));
    d.rows.push_back(std::move(row));
  }
  if (!header) throw ParseError(source + ": missing header");
  if (d.rows.empty()) throw ParseError(source + ": no design rows");
  return d;
}

DesignTable read_design_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open design table " + path.string());
  return read_design_csv(in, path.string());
}

void write_design_csv(const DesignTable& design, std::ostream& out) {
  out << "yaw_deg,tilt_deg,hc_mm,vf_m_per_min";
  for (const auto& n : design.response_names) out << ',' << n;
  out << '\n';
  std::ostringstream os;
  os.precision(10);
  for (const auto& row : design.rows) {
    for (std::size_t f = 0; f < kFactorCount; ++f) out << (f ? "," : "") << row.levels[f];
    for (double v : row.responses) {
      if (std::isnan(v)) {
        out << ",nan";
      } else {
        os.str("");
        os << v;
        out << ',' << os.str();
      }
    }
    out << '\n';
  }
}

void write_effect_table(const EffectTable& table, std::ostream& out) {
  out << "parameter,mean,yaw,tilt,scallop_height,feedrate\n";
  std::ostringstream os;
  os.precision(6);
  for (const auto& p : table.rows) {
    os.str("");
    os << p.name << ',' << p.mean;
    for (double e : p.effects) os << ',' << e;
    out << os.str() << '\n';
  }
}

}  // namespace surftopo
