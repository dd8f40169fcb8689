#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coxsplit/calibration.hpp"
#include "coxsplit/errors.hpp"
#include "coxsplit/experiment.hpp"
#include "coxsplit/simulation.hpp"

namespace coxsplit {

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Shortest decimal that parses back to exactly the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError("cannot parse number '" + std::string(s) + "'");
  }
  return x;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader =
    "dataset_index,box_min,box_q1,box_median,box_q3,box_max,exact_p,avg_e,"
    "shafer_e_of_exact_p,vs_of_exact_p,sinv_of_avg_e,saturation_flag";

inline void write_csv(const FigureData& data, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : data.records) {
    out << r.dataset_index << ',' << format_double(r.box.min) << ','
        << format_double(r.box.q1) << ',' << format_double(r.box.median) << ','
        << format_double(r.box.q3) << ',' << format_double(r.box.max) << ','
        << format_double(r.exact_p) << ',' << format_double(r.avg_e) << ','
        << format_double(r.shafer_e_of_exact_p) << ',' << format_double(r.vs_of_exact_p) << ','
        << format_double(r.sinv_of_avg_e) << ',' << (r.saturated ? 1 : 0) << '\n';
  }
}

inline void emit_csv(const FigureData& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path);
  write_csv(data, out);
  out.flush();
  if (!out) throw IoError("write failed", path);
}

/// Reads back what write_csv produced. Whiskers are not stored in the CSV, so
/// they are set to the sample min and max and outliers are left empty.
inline FigureData parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ValidationError("parse_csv: missing or unexpected header");
  }
  FigureData data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != 12) throw ValidationError("parse_csv: expected 12 columns");
    DatasetRecord r;
    r.dataset_index = static_cast<int>(parse_double(cells[0]));
    r.box.min = parse_double(cells[1]);
    r.box.q1 = parse_double(cells[2]);
    r.box.median = parse_double(cells[3]);
    r.box.q3 = parse_double(cells[4]);
    r.box.max = parse_double(cells[5]);
    r.box.whisker_low = r.box.min;
    r.box.whisker_high = r.box.max;
    r.exact_p = parse_double(cells[6]);
    r.avg_e = parse_double(cells[7]);
    r.shafer_e_of_exact_p = parse_double(cells[8]);
    r.vs_of_exact_p = parse_double(cells[9]);
    r.sinv_of_avg_e = parse_double(cells[10]);
    r.saturated = parse_double(cells[11]) != 0.0;
    data.records.push_back(std::move(r));
  }
  return data;
}

inline FigureData read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path);
  return parse_csv(in);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"m", c.m},           {"r", c.r},
          {"split_fraction", c.split_fraction},
          {"delta", c.delta},   {"sigma0", c.sigma0},
          {"n_datasets", c.n_datasets},
          {"n_splits", c.n_splits},
          {"seed", c.seed}};
}

inline nlohmann::json to_json(const RunManifest& m) {
  return {{"config", to_json(m.config)},
          {"generator_name", m.generator_name},
          {"software_version", m.software_version},
          {"timestamp", m.timestamp},
          {"output_paths", m.output_paths},
          {"column_notes",
           {{"vs_of_exact_p", kVsBoundNote},
            {"sinv_of_avg_e", "Shafer-inverse projection of avg_e; not a valid p-value"}}}};
}

inline nlohmann::json to_json(const DatasetRecord& r) {
  return {{"dataset_index", r.dataset_index},
          {"box_min", r.box.min},
          {"box_q1", r.box.q1},
          {"box_median", r.box.median},
          {"box_q3", r.box.q3},
          {"box_max", r.box.max},
          {"exact_p", r.exact_p},
          {"avg_e", r.avg_e},
          {"shafer_e_of_exact_p", r.shafer_e_of_exact_p},
          {"vs_of_exact_p", r.vs_of_exact_p},
          {"vs_of_exact_p_note", kVsBoundNote},
          {"sinv_of_avg_e", r.sinv_of_avg_e},
          {"saturation_flag", r.saturated ? 1 : 0}};
}

inline nlohmann::json to_json(const SplitOutcome& o) {
  return {{"selected", o.selected},
          {"a", o.a},
          {"b", o.b},
          {"sigma", o.sigma},
          {"p_value", o.p_value},
          {"e_value", o.e_value ? nlohmann::json(*o.e_value) : nlohmann::json(nullptr)},
          {"saturated", o.saturated}};
}

inline nlohmann::json experiment_json(const ExperimentResult& result, const RunManifest& manifest) {
  nlohmann::json j;
  j["manifest"] = to_json(manifest);
  j["datasets"] = nlohmann::json::array();
  for (const auto& r : result.figure.records) j["datasets"].push_back(to_json(r));
  if (!result.splits.empty()) {
    j["splits"] = nlohmann::json::array();
    for (const auto& per_dataset : result.splits) {
      auto arr = nlohmann::json::array();
      for (const auto& o : per_dataset) arr.push_back(to_json(o));
      j["splits"].push_back(std::move(arr));
    }
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed", path);
}

// ---------------------------------------------------------------------------
// Config files: flat "key = value" lines, '#' starts a comment.
// ---------------------------------------------------------------------------

inline ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig cfg = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto as_int = [&] {
      const double v = parse_double(value);
      if (v != std::floor(v)) throw ValidationError("config key '" + key + "' needs an integer");
      return static_cast<int>(v);
    };
    if (key == "m") cfg.m = as_int();
    else if (key == "r") cfg.r = as_int();
    else if (key == "split_fraction") cfg.split_fraction = parse_double(value);
    else if (key == "delta") cfg.delta = parse_double(value);
    else if (key == "sigma0") cfg.sigma0 = parse_double(value);
    else if (key == "n_datasets") cfg.n_datasets = as_int();
    else if (key == "n_splits") cfg.n_splits = as_int();
    else if (key == "seed") {
      std::uint64_t s = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), s);
      if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
        throw ValidationError("config key 'seed' needs an unsigned integer");
      }
      cfg.seed = s;
    } else {
      throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig read_config_file(const std::string& path, ExperimentConfig cfg = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), cfg);
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

struct SvgOptions {
  PlotDomain domain = PlotDomain::p;
  bool show_vs = false;  // green VS series, e-domain only
};

namespace detail {

struct LogAxis {
  double lo_decade;
  double hi_decade;
  double top;
  double bottom;

  double y(double v) const {
    const double l = std::log10(std::max(v, std::pow(10.0, lo_decade)));
    return bottom - (l - lo_decade) / (hi_decade - lo_decade) * (bottom - top);
  }
};

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace detail

/// Boxplots of split p-values (p-domain) or per-dataset series on a log axis
/// (e-domain). Colours: blue exact p-value (Shafer-calibrated in the e-domain),
/// orange average e-value (Shafer-inverse projected in the p-domain), green VS.
inline std::string render_svg(const FigureData& data, const SvgOptions& opts) {
  constexpr double width = 720, height = 440, left = 70, right = 20, top = 30, bottom = 390;
  const std::size_t n = data.records.size();
  const bool p_domain = opts.domain == PlotDomain::p;

  struct Series {
    std::string name;
    std::string colour;
    std::vector<double> values;
    std::string note;
  };
  std::vector<Series> series;
  if (p_domain) {
    series.push_back({"exact_p", "blue", {}, ""});
    series.push_back({"sinv_of_avg_e", "orange", {}, ""});
    for (const auto& r : data.records) {
      series[0].values.push_back(r.exact_p);
      series[1].values.push_back(r.sinv_of_avg_e);
    }
  } else {
    series.push_back({"shafer_e_of_exact_p", "blue", {}, ""});
    series.push_back({"avg_e", "orange", {}, ""});
    if (opts.show_vs) series.push_back({"vs_of_exact_p", "green", {}, kVsBoundNote});
    for (const auto& r : data.records) {
      series[0].values.push_back(r.shafer_e_of_exact_p);
      series[1].values.push_back(r.avg_e);
      if (opts.show_vs) series[2].values.push_back(r.vs_of_exact_p);
    }
  }

  // Decade range covering everything drawn.
  double vmin = p_domain ? 0.01 : 1.0;
  double vmax = p_domain ? 1.0 : 10.0;
  const auto widen = [&](double v) {
    if (v > 0.0 && std::isfinite(v)) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  };
  for (const auto& s : series) std::for_each(s.values.begin(), s.values.end(), widen);
  if (p_domain) {
    for (const auto& r : data.records) {
      widen(r.box.min);
      for (double o : r.box.outliers) widen(o);
    }
  }
  vmin = std::max(vmin, 1e-300);
  detail::LogAxis axis{std::floor(std::log10(vmin)), std::ceil(std::log10(vmax)), top, bottom};
  if (axis.hi_decade <= axis.lo_decade) axis.hi_decade = axis.lo_decade + 1;

  const double slot = (width - left - right) / static_cast<double>(std::max<std::size_t>(n, 1));
  const auto x = [&](std::size_t i) { return left + slot * (static_cast<double>(i) + 0.5); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // Axes and decade ticks.
  svg << "<g class=\"axis\" stroke=\"black\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << width - right << "\" y2=\""
      << bottom << "\"/>\n";
  const int decades = static_cast<int>(axis.hi_decade - axis.lo_decade);
  const int step = std::max(1, decades / 10);
  for (int d = static_cast<int>(axis.lo_decade); d <= static_cast<int>(axis.hi_decade); d += step) {
    const double yy = axis.y(std::pow(10.0, d));
    svg << "<line x1=\"" << left - 4 << "\" y1=\"" << detail::fmt(yy) << "\" x2=\"" << left
        << "\" y2=\"" << detail::fmt(yy) << "\"/>"
        << "<text x=\"" << left - 8 << "\" y=\"" << detail::fmt(yy + 4)
        << "\" text-anchor=\"end\" stroke=\"none\">1e" << d << "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    svg << "<text x=\"" << detail::fmt(x(i)) << "\" y=\"" << bottom + 16
        << "\" text-anchor=\"middle\" stroke=\"none\">" << data.records[i].dataset_index
        << "</text>\n";
  }
  svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" stroke=\"none\">dataset</text>\n"
      << "<text x=\"16\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" stroke=\"none\" "
      << "transform=\"rotate(-90 16 " << (top + bottom) / 2 << ")\">"
      << (p_domain ? "p-value" : "e-value") << " (log scale)</text>\n"
      << "</g>\n";

  // Reference levels: 5% / 1% in the p-domain, sqrt(10) / 10 in the e-domain.
  const double refs[2] = {p_domain ? 0.05 : std::sqrt(10.0), p_domain ? 0.01 : 10.0};
  for (double ref : refs) {
    if (ref < std::pow(10.0, axis.lo_decade) || ref > std::pow(10.0, axis.hi_decade)) continue;
    svg << "<line class=\"reference\" x1=\"" << left << "\" y1=\"" << detail::fmt(axis.y(ref))
        << "\" x2=\"" << width - right << "\" y2=\"" << detail::fmt(axis.y(ref))
        << "\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n";
  }

  if (p_domain) {
    const double half = std::min(slot * 0.3, 20.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& b = data.records[i].box;
      const double cx = x(i);
      svg << "<g class=\"box\" data-dataset=\"" << data.records[i].dataset_index
          << "\" stroke=\"black\" fill=\"none\">"
          << "<rect x=\"" << detail::fmt(cx - half) << "\" y=\"" << detail::fmt(axis.y(b.q3))
          << "\" width=\"" << detail::fmt(2 * half) << "\" height=\""
          << detail::fmt(std::max(0.0, axis.y(b.q1) - axis.y(b.q3))) << "\"/>"
          << "<line x1=\"" << detail::fmt(cx - half) << "\" y1=\"" << detail::fmt(axis.y(b.median))
          << "\" x2=\"" << detail::fmt(cx + half) << "\" y2=\"" << detail::fmt(axis.y(b.median))
          << "\" stroke=\"darkorange\"/>"
          << "<line x1=\"" << detail::fmt(cx) << "\" y1=\"" << detail::fmt(axis.y(b.q3))
          << "\" x2=\"" << detail::fmt(cx) << "\" y2=\"" << detail::fmt(axis.y(b.whisker_high))
          << "\"/>"
          << "<line x1=\"" << detail::fmt(cx) << "\" y1=\"" << detail::fmt(axis.y(b.q1))
          << "\" x2=\"" << detail::fmt(cx) << "\" y2=\"" << detail::fmt(axis.y(b.whisker_low))
          << "\"/>";
      for (double o : b.outliers) {
        svg << "<circle cx=\"" << detail::fmt(cx) << "\" cy=\"" << detail::fmt(axis.y(o))
            << "\" r=\"2\"/>";
      }
      svg << "</g>\n";
    }
  }

  for (const auto& s : series) {
    svg << "<polyline class=\"series\" data-series=\"" << s.name << "\" fill=\"none\" stroke=\""
        << s.colour << "\" points=\"";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      svg << (i ? " " : "") << detail::fmt(x(i)) << ',' << detail::fmt(axis.y(s.values[i]));
    }
    svg << "\">";
    if (!s.note.empty()) svg << "<title>" << s.note << "</title>";
    svg << "</polyline>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void emit_svg(const FigureData& data, const std::string& path, const SvgOptions& opts) {
  write_text_file(path, render_svg(data, opts));
}

}  // namespace coxsplit
