#include "cdsndp/milp_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "cdsndp/error.hpp"

namespace cdsndp {

int MilpModel::add_variable(std::string name, double lower, double upper, VarKind kind, int branch_priority) {
  if (kind == VarKind::Binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  vars_.push_back(Variable{std::move(name), lower, upper, kind, branch_priority});
  obj_.push_back(0.0);
  return static_cast<int>(vars_.size() - 1);
}

int MilpModel::add_constraint(std::string name, std::vector<LinearTerm> terms, Sense sense, double rhs) {
  cons_.push_back(Constraint{std::move(name), std::move(terms), sense, rhs});
  return static_cast<int>(cons_.size() - 1);
}

void MilpModel::add_objective(int var, double coef) { obj_.at(static_cast<std::size_t>(var)) += coef; }

std::size_t MilpModel::num_integral() const {
  return static_cast<std::size_t>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.is_integral(); }));
}

double MilpModel::evaluate(const std::vector<double>& values) const {
  double v = offset_;
  for (std::size_t j = 0; j < vars_.size(); ++j) v += obj_[j] * values.at(j);
  return v;
}

double MilpModel::max_violation(const std::vector<double>& values) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const double x = values.at(j);
    worst = std::max({worst, vars_[j].lower - x, x - vars_[j].upper});
    if (vars_[j].is_integral()) worst = std::max(worst, std::abs(x - std::round(x)));
  }
  for (const auto& c : cons_) {
    double act = 0.0;
    for (const auto& t : c.terms) act += t.coef * values.at(static_cast<std::size_t>(t.var));
    switch (c.sense) {
      case Sense::LessEqual:
        worst = std::max(worst, act - c.rhs);
        break;
      case Sense::GreaterEqual:
        worst = std::max(worst, c.rhs - act);
        break;
      case Sense::Equal:
        worst = std::max(worst, std::abs(act - c.rhs));
        break;
    }
  }
  return worst;
}

void MilpModel::check() const {
  const int n = static_cast<int>(vars_.size());
  for (const auto& v : vars_) {
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
      throw ModelError("variable " + v.name + " has inconsistent bounds");
  }
  for (const auto& c : cons_) {
    if (!std::isfinite(c.rhs)) throw ModelError("constraint " + c.name + " has a non-finite right-hand side");
    for (const auto& t : c.terms) {
      if (t.var < 0 || t.var >= n) throw ModelError("constraint " + c.name + " references an undeclared variable");
      if (!std::isfinite(t.coef)) throw ModelError("constraint " + c.name + " has a non-finite coefficient");
    }
  }
  for (double c : obj_)
    if (!std::isfinite(c)) throw ModelError("objective has a non-finite coefficient");
}

namespace {

std::string sanitize(const std::string& raw, const char* fallback, std::size_t index) {
  std::string s;
  for (char ch : raw) s += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') ? ch : '_';
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == 'e' || s[0] == 'E')
    s = std::string(fallback) + std::to_string(index) + "_" + s;
  return s;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_terms(std::ostringstream& os, const std::vector<LinearTerm>& terms, const std::vector<std::string>& names) {
  int on_line = 0;
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    os << (t.coef < 0 ? " - " : (first ? " " : " + ")) << num(std::abs(t.coef)) << ' '
       << names[static_cast<std::size_t>(t.var)];
    first = false;
    if (++on_line == 6) {
      os << "\n   ";
      on_line = 0;
    }
  }
  if (first) os << " 0 " << names.at(0);
}

}  // namespace

std::vector<std::string> MilpModel::lp_column_names() const {
  std::vector<std::string> vnames(vars_.size());
  std::unordered_set<std::string> used;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    std::string s = sanitize(vars_[j].name, "v", j);
    if (!used.insert(s).second) {
      s += "_" + std::to_string(j);
      used.insert(s);
    }
    vnames[j] = s;
  }
  return vnames;
}

std::string MilpModel::to_lp_format() const {
  const std::vector<std::string> vnames = lp_column_names();
  std::ostringstream os;
  os << "\\ objective offset " << num(offset_) << " is not part of this file\n";
  os << (sense_ == ObjectiveSense::Maximize ? "Maximize\n" : "Minimize\n") << " obj:";
  std::vector<LinearTerm> obj;
  for (std::size_t j = 0; j < obj_.size(); ++j)
    if (obj_[j] != 0.0) obj.push_back({static_cast<int>(j), obj_[j]});
  if (vars_.empty()) {
    os << "\nEnd\n";
    return os.str();
  }
  write_terms(os, obj, vnames);
  os << "\nSubject To\n";
  std::unordered_set<std::string> cused;
  for (std::size_t i = 0; i < cons_.size(); ++i) {
    const auto& c = cons_[i];
    std::string cname = sanitize(c.name, "c", i);
    if (!cused.insert(cname).second) {
      cname += "_" + std::to_string(i);
      cused.insert(cname);
    }
    os << ' ' << cname << ':';
    write_terms(os, c.terms, vnames);
    os << (c.sense == Sense::LessEqual ? " <= " : c.sense == Sense::GreaterEqual ? " >= " : " = ") << num(c.rhs)
       << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    if (v.kind == VarKind::Binary) continue;
    const std::string lo = std::isinf(v.lower) ? "-inf" : num(v.lower);
    const std::string hi = std::isinf(v.upper) ? "+inf" : num(v.upper);
    os << ' ' << lo << " <= " << vnames[j] << " <= " << hi << '\n';
  }
  std::vector<std::size_t> gen, bin;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    if (vars_[j].kind == VarKind::Integer) gen.push_back(j);
    if (vars_[j].kind == VarKind::Binary) bin.push_back(j);
  }
  if (!gen.empty()) {
    os << "General\n";
    for (auto j : gen) os << ' ' << vnames[j] << '\n';
  }
  if (!bin.empty()) {
    os << "Binary\n";
    for (auto j : bin) os << ' ' << vnames[j] << '\n';
  }
  os << "End\n";
  return os.str();
}

}  // namespace cdsndp
