#include "msw/error.hpp"
#include "msw/harness.hpp"

#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace msw::harness {

namespace {

using nlohmann::json;

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    std::string_view f = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
    out.push_back(f);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool to_double(std::string_view s, double& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool to_size(std::string_view s, std::size_t& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string rate_header(bool grouped, bool with_bound) {
  std::string h = grouped ? "d_test,n,mean,stderr,runs,wall_s" : "n,mean,stderr,runs,wall_s";
  if (with_bound) h += ",bound";
  return h;
}

bool any_bound(const std::vector<RateCurve>& curves) {
  for (const auto& c : curves) {
    for (const auto& r : c.rows) {
      if (r.bound) return true;
    }
  }
  return false;
}

void append_rate_row(std::string& out, const RateRow& r, bool with_bound) {
  out += std::to_string(r.n);
  out += ',' + format_number(r.mean);
  out += ',' + format_number(r.std_error);
  out += ',' + std::to_string(r.runs);
  out += ',' + format_number(r.wall_s);
  if (with_bound) out += ',' + (r.bound ? format_number(*r.bound) : std::string());
  out += '\n';
}

json rate_row_json(const RateRow& r) {
  json j{{"n", r.n}, {"mean", r.mean}, {"stderr", r.std_error}, {"runs", r.runs}, {"wall_s", r.wall_s}};
  if (r.bound) j["bound"] = *r.bound;
  return j;
}

json curve_json(const RateCurve& curve) {
  json rows = json::array();
  for (const auto& r : curve.rows) rows.push_back(rate_row_json(r));
  json j{{"rows", rows}};
  if (curve.d_test) j["d_test"] = *curve.d_test;
  return j;
}

[[noreturn]] void malformed(const std::string& what) { throw IoError("malformed rate table: " + what); }

}  // namespace

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw ConfigError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("format_number: conversion failed");
  return std::string(buf, ptr);
}

std::string to_csv(const RateCurve& curve) { return to_csv(std::vector<RateCurve>{curve}); }

std::string to_csv(const std::vector<RateCurve>& curves) {
  const bool grouped = curves.size() > 1 || (!curves.empty() && curves.front().d_test.has_value());
  const bool with_bound = any_bound(curves);
  std::string out = rate_header(grouped, with_bound) + '\n';
  for (const auto& c : curves) {
    for (const auto& r : c.rows) {
      if (grouped) out += (c.d_test ? std::to_string(*c.d_test) : std::string()) + ',';
      append_rate_row(out, r, with_bound);
    }
  }
  return out;
}

std::string to_csv(const RatioTable& table) {
  std::string out = "n,eps,frequency,freq_stderr,bound,bound_raw,runs\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.n) + ',' + format_number(r.eps) + ',' + format_number(r.frequency) + ',' +
           format_number(r.freq_stderr) + ',' + format_number(r.bound) + ',' + format_number(r.bound_raw) + ',' +
           std::to_string(r.runs) + '\n';
  }
  return out;
}

std::string to_json(const RateCurve& curve) { return curve_json(curve).dump(2) + '\n'; }

std::string to_json(const std::vector<RateCurve>& curves) {
  if (curves.size() == 1 && !curves.front().d_test) return to_json(curves.front());
  json arr = json::array();
  for (const auto& c : curves) arr.push_back(curve_json(c));
  return json{{"curves", arr}}.dump(2) + '\n';
}

std::string to_json(const RatioTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back(json{{"n", r.n},
                        {"eps", r.eps},
                        {"frequency", r.frequency},
                        {"freq_stderr", r.freq_stderr},
                        {"bound", r.bound},
                        {"bound_raw", r.bound_raw},
                        {"runs", r.runs}});
  }
  return json{{"rows", rows}}.dump(2) + '\n';
}

std::vector<RateCurve> parse_rate_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) malformed("empty input");
  const auto header = fields_of(lines.front());
  const bool grouped = !header.empty() && header.front() == "d_test";
  const std::size_t base = grouped ? 1 : 0;
  const std::vector<std::string_view> expected{"n", "mean", "stderr", "runs", "wall_s"};
  if (header.size() < base + expected.size()) malformed("short header");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (header[base + i] != expected[i]) malformed("unexpected header '" + std::string(lines.front()) + "'");
  }
  const bool with_bound = header.size() == base + expected.size() + 1 && header.back() == "bound";
  if (header.size() != base + expected.size() + (with_bound ? 1 : 0)) malformed("unexpected header columns");
  std::vector<RateCurve> curves;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto f = fields_of(lines[li]);
    if (f.size() != header.size()) malformed("line " + std::to_string(li + 1) + " has the wrong field count");
    std::optional<std::size_t> d_test;
    if (grouped && !f[0].empty()) {
      std::size_t d = 0;
      if (!to_size(f[0], d)) malformed("bad d_test on line " + std::to_string(li + 1));
      d_test = d;
    }
    RateRow row;
    if (!to_size(f[base], row.n) || !to_double(f[base + 1], row.mean) || !to_double(f[base + 2], row.std_error) ||
        !to_size(f[base + 3], row.runs) || !to_double(f[base + 4], row.wall_s)) {
      malformed("bad value on line " + std::to_string(li + 1));
    }
    if (with_bound && !f.back().empty()) {
      double b = 0.0;
      if (!to_double(f.back(), b)) malformed("bad bound on line " + std::to_string(li + 1));
      row.bound = b;
    }
    if (curves.empty() || curves.back().d_test != d_test) {
      curves.emplace_back();
      curves.back().d_test = d_test;
    }
    curves.back().rows.push_back(row);
  }
  if (curves.empty()) curves.emplace_back();
  return curves;
}

std::vector<RateCurve> parse_rate_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  auto read_curve = [](const json& j) {
    RateCurve curve;
    if (j.contains("d_test")) curve.d_test = j.at("d_test").get<std::size_t>();
    for (const auto& r : j.at("rows")) {
      RateRow row;
      row.n = r.at("n").get<std::size_t>();
      row.mean = r.at("mean").get<double>();
      row.std_error = r.at("stderr").get<double>();
      row.runs = r.at("runs").get<std::size_t>();
      row.wall_s = r.at("wall_s").get<double>();
      if (r.contains("bound")) row.bound = r.at("bound").get<double>();
      curve.rows.push_back(row);
    }
    return curve;
  };
  try {
    std::vector<RateCurve> curves;
    if (doc.contains("curves")) {
      for (const auto& c : doc.at("curves")) curves.push_back(read_curve(c));
    } else {
      curves.push_back(read_curve(doc));
    }
    return curves;
  } catch (const json::exception& e) {
    malformed(e.what());
  }
}

std::string meta_json(const ExperimentConfig& config) {
  const std::string text = canonical_text(config);
  json cfg = json::object();
  for (const auto& [key, value] : parse_entries(text)) cfg[key] = value;
  json doc{{"experiment", to_string(config.experiment)},
           {"master_seed", config.master_seed},
           {"config", cfg},
           {"config_hash", git_blob_hash(text)}};
  return doc.dump(2) + '\n';
}

std::string meta_path(const std::string& out) { return out + ".meta.json"; }

void write_file(const std::string& path, std::string_view content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  file.write(content.data(), static_cast<std::streamsize>(content.size()));
  file.close();
  if (!file) throw IoError("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for reading: " + std::strerror(errno));
  std::ostringstream buf;
  buf << file.rdbuf();
  if (file.bad()) throw IoError("failed reading '" + path + "'");
  return buf.str();
}

void emit(const std::vector<RateCurve>& curves, Format format, const std::string& path,
          const ExperimentConfig& config) {
  write_file(path, format == Format::Csv ? to_csv(curves) : to_json(curves));
  write_file(meta_path(path), meta_json(config));
}

void emit(const RatioTable& table, Format format, const std::string& path, const ExperimentConfig& config) {
  write_file(path, format == Format::Csv ? to_csv(table) : to_json(table));
  write_file(meta_path(path), meta_json(config));
}

SampleMatrix parse_sample_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  const auto lines = lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && lines[first].find_first_not_of(" \t") == std::string_view::npos) ++first;
  if (first == lines.size()) throw IoError("sample file has no rows");
  {
    const auto f = fields_of(lines[first]);
    bool header = true;
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (f[k] != "x" + std::to_string(k + 1)) header = false;
    }
    if (header) ++first;
  }
  for (std::size_t li = first; li < lines.size(); ++li) {
    if (lines[li].find_first_not_of(" \t") == std::string_view::npos) continue;
    std::vector<double> row;
    for (const auto f : fields_of(lines[li])) {
      double v = 0.0;
      if (!to_double(f, v)) {
        throw IoError("sample file line " + std::to_string(li + 1) + ": '" + std::string(f) + "' is not a number");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("sample file line " + std::to_string(li + 1) + ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("sample file has no rows");
  RowMatrix data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  try {
    return SampleMatrix(std::move(data));
  } catch (const DomainError& e) {
    throw IoError(std::string("sample file: ") + e.what());
  }
}

SampleMatrix read_sample_csv(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_sample_csv(text);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::string to_sample_csv(const SampleMatrix& samples, bool header) {
  std::string out;
  if (header) {
    for (std::size_t k = 0; k < samples.d(); ++k) out += (k ? ",x" : "x") + std::to_string(k + 1);
    out += '\n';
  }
  for (std::size_t i = 0; i < samples.n(); ++i) {
    for (std::size_t k = 0; k < samples.d(); ++k) {
      if (k) out += ',';
      out += format_number(samples.data()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    }
    out += '\n';
  }
  return out;
}

}  // namespace msw::harness
