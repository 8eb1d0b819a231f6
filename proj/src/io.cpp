#include "lagsynth/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lagsynth/common.hpp"

namespace lagsynth::io {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'L', 'G', 'S', 'T'};
constexpr std::uint8_t kVersion = 1;

// All integers and doubles are serialized little-endian regardless of the
// host: bytes are assembled explicitly.
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint64_t take_u64(const std::string& in, std::size_t& pos,
                       const std::string& where) {
  require(pos + 8 <= in.size(), where, "truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= std::uint64_t(std::uint8_t(in[pos + std::size_t(i)])) << (8 * i);
  }
  pos += 8;
  return v;
}

void put_f64(std::string& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(out, bits);
}

double take_f64(const std::string& in, std::size_t& pos,
                const std::string& where) {
  const std::uint64_t bits = take_u64(in, pos, where);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(std::uint8_t(s[b]))) ++b;
  while (e > b && std::isspace(std::uint8_t(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

// ---------------------------------------------------------------------------
// primitives
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : bytes) {
    h ^= std::uint8_t(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "io::read_file", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void atomic_write(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), "io::atomic_write", "cannot create " + tmp);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    require(out.good(), "io::atomic_write", "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, "io::atomic_write", "rename failed: " + ec.message());
}

// ---------------------------------------------------------------------------
// array container
// ---------------------------------------------------------------------------

void write_array(const std::string& path,
                 const std::vector<std::size_t>& dims,
                 const std::vector<double>& data) {
  require(!dims.empty() && dims.size() <= 255, "io::write_array",
          "dimension count out of range");
  std::size_t total = 1;
  for (std::size_t d : dims) total *= d;
  require(total == data.size(), "io::write_array",
          "data size does not match dimensions");

  std::string out;
  out.reserve(6 + 8 * dims.size() + 8 * data.size());
  out.append(kMagic, 4);
  out.push_back(char(kVersion));
  out.push_back(char(dims.size()));
  for (std::size_t d : dims) put_u64(out, d);
  for (double v : data) put_f64(out, v);
  atomic_write(path, out);
}

std::pair<std::vector<std::size_t>, std::vector<double>> read_array(
    const std::string& path) {
  const std::string in = read_file(path);
  const std::string where = "io::read_array";
  require(in.size() >= 6 && std::memcmp(in.data(), kMagic, 4) == 0, where,
          path + " is not an array file");
  require(std::uint8_t(in[4]) == kVersion, where,
          "unsupported version in " + path);
  const std::size_t ndim = std::uint8_t(in[5]);
  require(ndim >= 1, where, "zero-dimensional array in " + path);

  std::size_t pos = 6;
  std::vector<std::size_t> dims(ndim);
  std::size_t total = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    dims[i] = std::size_t(take_u64(in, pos, where));
    total *= dims[i];
  }
  require(in.size() == pos + 8 * total, where,
          "payload size mismatch in " + path);
  std::vector<double> data(total);
  for (std::size_t i = 0; i < total; ++i) data[i] = take_f64(in, pos, where);
  return {std::move(dims), std::move(data)};
}

void write_tensor(const std::string& path, const SpectralFeatureTensor& t) {
  t.validate("io::write_tensor");
  write_array(path, {t.t_samples, t.n_channels, t.n_freqs}, t.data);

  json meta;
  meta["sample_rate"] = t.sample_rate;
  meta["channel_labels"] = t.channel_labels;
  meta["freqs"] = t.freqs;
  meta["run_boundaries"] = t.run_boundaries;
  atomic_write(path + ".json", meta.dump(2) + "\n");
}

SpectralFeatureTensor read_tensor(const std::string& path) {
  const auto [dims, data] = read_array(path);
  require(dims.size() == 3, "io::read_tensor",
          path + " does not hold a 3-d tensor");

  SpectralFeatureTensor t(dims[0], dims[1], dims[2]);
  t.data = data;

  json meta;
  try {
    meta = json::parse(read_file(path + ".json"));
  } catch (const json::parse_error& err) {
    fail("io::read_tensor", "bad sidecar " + path + ".json: " + err.what());
  }
  t.sample_rate = meta.at("sample_rate").get<double>();
  t.channel_labels = meta.at("channel_labels").get<std::vector<std::string>>();
  t.freqs = meta.at("freqs").get<std::vector<double>>();
  t.run_boundaries = meta.at("run_boundaries").get<std::vector<std::size_t>>();
  t.validate("io::read_tensor");
  return t;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_series_csv(const std::string& path,
                      const std::vector<double>& values) {
  std::string out;
  for (double v : values) {
    out += format_g17(v);
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<double> read_series_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(s, &used));
      require(used == s.size(), "io::read_series_csv", "trailing characters");
    } catch (const std::exception&) {
      fail("io::read_series_csv",
           path + ":" + std::to_string(line_no) + ": not a number: " + s);
    }
  }
  return values;
}

void write_onsets_csv(const std::string& path, const TrialParadigm& paradigm) {
  std::string out = "time_s,side\n";
  for (const auto& onset : paradigm.onsets) {
    out += format_g17(onset.time_s);
    out += onset.side == Side::left ? ",left\n" : ",right\n";
  }
  atomic_write(path, out);
}

TrialParadigm read_onsets_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  TrialParadigm paradigm;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty() || s == "time_s,side") continue;
    const auto comma = s.find(',');
    require(comma != std::string::npos, "io::read_onsets_csv",
            path + ":" + std::to_string(line_no) + ": missing comma");
    TrialParadigm::Onset onset;
    try {
      onset.time_s = std::stod(s.substr(0, comma));
    } catch (const std::exception&) {
      fail("io::read_onsets_csv",
           path + ":" + std::to_string(line_no) + ": bad time value");
    }
    const std::string side = trim(s.substr(comma + 1));
    if (side == "left") {
      onset.side = Side::left;
    } else if (side == "right") {
      onset.side = Side::right;
    } else {
      fail("io::read_onsets_csv",
           path + ":" + std::to_string(line_no) + ": bad side: " + side);
    }
    paradigm.onsets.push_back(onset);
  }
  paradigm.validate("io::read_onsets_csv");
  return paradigm;
}

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

Config Config::parse_text(const std::string& text, const std::string& where) {
  Config cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    const std::string s = trim(line);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    require(eq != std::string::npos, where,
            "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    require(!key.empty(), where,
            "line " + std::to_string(line_no) + ": empty key");
    require(cfg.values_.emplace(key, value).second, where,
            "line " + std::to_string(line_no) + ": duplicate key " + key);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  Config cfg = parse_text(read_file(path), "config " + path);
  cfg.base_dir_ = std::filesystem::path(path).parent_path().string();
  return cfg;
}

bool Config::has(const std::string& key) const {
  const bool present = values_.count(key) != 0;
  if (present) consumed_.insert(key);
  return present;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  return it->second;
}

std::string Config::need_string(const std::string& key) const {
  const auto it = values_.find(key);
  require(it != values_.end(), "config", "missing required key " + key);
  consumed_.insert(key);
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    require(used == it->second.size(), "config", "trailing characters");
    return v;
  } catch (const std::exception&) {
    fail("config", "key " + key + ": not a number: " + it->second);
  }
}

std::size_t Config::get_size(const std::string& key,
                             std::size_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  try {
    // stoull accepts a leading minus by wrapping around; reject it here.
    require(it->second.find('-') == std::string::npos, "config", "negative");
    std::size_t used = 0;
    const unsigned long long v = std::stoull(it->second, &used);
    require(used == it->second.size(), "config", "trailing characters");
    return std::size_t(v);
  } catch (const std::exception&) {
    fail("config", "key " + key + ": not a non-negative integer: " +
                       it->second);
  }
}

std::uint64_t Config::get_u64(const std::string& key,
                              std::uint64_t fallback) const {
  return get_size(key, std::size_t(fallback));
}

void Config::require_all_consumed(const std::string& where) const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  require(unknown.empty(), where, "unknown config keys: " + unknown);
}

std::string Config::resolve_path(const std::string& value) const {
  if (value.empty() || base_dir_.empty()) return value;
  const std::filesystem::path p(value);
  if (p.is_absolute()) return value;
  return (std::filesystem::path(base_dir_) / p).string();
}

}  // namespace lagsynth::io
