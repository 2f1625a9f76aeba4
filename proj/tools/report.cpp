#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cli {

namespace {
void dump(const Json& j, int depth, std::string& out) {
  std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        dump(it.value(), depth + 1, out);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : j) flat = flat && e.is_primitive();
      if (flat) {
        out += "[";
        for (size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], depth + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(j[i], depth + 1, out);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      out += std::isfinite(j.get<double>()) ? format17(j.get<double>()) : "null";
      return;
    default:
      out += j.dump();
  }
}
}  // namespace

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string dump17(const Json& j) {
  std::string out;
  dump(j, 0, out);
  return out + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

void write_json(const std::string& path, const Json& j) { write_text(path, dump17(j)); }

Json run_config(const CLI::App& leaf) {
  std::string command = leaf.get_name();
  for (const CLI::App* p = leaf.get_parent(); p && p->get_parent(); p = p->get_parent())
    command = p->get_name() + " " + command;
  Json opts = Json::object();
  for (const CLI::Option* o : leaf.get_options()) {
    std::string name = o->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (o->get_type_size() == 0) {
      opts[name] = o->count() > 0;
    } else if (o->count() > 0) {
      opts[name] = o->as<std::string>();
    } else {
      opts[name] = o->get_default_str();
    }
  }
  return Json{{"tool", "bubbling"}, {"version", BUBBLING_VERSION}, {"command", command}, {"options", opts}};
}

Json artifact(const CLI::App& leaf, Json result) {
  Json j = run_config(leaf);
  j["result"] = std::move(result);
  return j;
}

Csv::Csv(std::vector<std::string> header) : cols_(header.size()) {
  for (size_t i = 0; i < header.size(); ++i) out_ += (i ? "," : "") + header[i];
  out_ += "\n";
}

void Csv::row(const std::vector<double>& values) {
  if (values.size() != cols_) throw std::logic_error("csv row width mismatch");
  for (size_t i = 0; i < values.size(); ++i) out_ += (i ? "," : "") + format17(values[i]);
  out_ += "\n";
}

void Csv::save(const std::string& path) const { write_text(path, out_); }

void Csv::save(const std::string& path, const CLI::App& leaf) const {
  save(path);
  if (!path.empty() && path != "-") write_json(path + ".meta.json", run_config(leaf));
}

bubbling::Point parse_point(const std::string& text) {
  std::stringstream ss(text);
  double x, y;
  char comma;
  if (!(ss >> x >> comma >> y) || comma != ',' || !(ss >> std::ws).eof())
    throw UsageError("expected a point 'x,y', got '" + text + "'");
  return {x, y};
}

bubbling::Config parse_points(const std::string& text) {
  bubbling::Config c;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) c.push_back(parse_point(item));
  if (c.empty()) throw UsageError("no points given");
  return c;
}

std::vector<double> parse_sweep(const std::string& text) {
  std::stringstream ss(text);
  double a, b;
  int n;
  char c1, c2;
  if (!(ss >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || !(ss >> std::ws).eof())
    throw UsageError("sweep must be start:end:count, got '" + text + "'");
  if (!(a > 0.0 && b > 0.0) || n < 1) throw UsageError("sweep needs positive endpoints and count >= 1");
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(i == 0 ? a : i == n - 1 ? b : a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return v;
}

bubbling::DomainSpec load_domain(const std::string& path) {
  if (path.empty()) return bubbling::DomainSpec::disk(1.0);
  return bubbling::DomainSpec::from_file(path);
}

Json to_json(const bubbling::Point& p) { return Json::array({p.x(), p.y()}); }

Json to_json(const bubbling::Config& c) {
  Json a = Json::array();
  for (const auto& p : c) a.push_back(to_json(p));
  return a;
}

}  // namespace cli
