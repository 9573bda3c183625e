#include "chaoslab/report.hpp"

#include <Eigen/Core>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "chaoslab/error.hpp"

namespace chaoslab {

std::string to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::fail:
      return "fail";
    case Status::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

CheckRecord& Report::add(CheckRecord c) {
  checks.push_back(std::move(c));
  return checks.back();
}

CheckRecord& Report::check_le(const std::string& name, double value, double bound, const std::string& note) {
  CheckRecord c;
  c.name = name;
  c.value = value;
  c.bound = bound;
  c.margin = bound - value;
  c.status = std::isfinite(value) ? (value <= bound ? Status::pass : Status::fail) : Status::inconclusive;
  c.note = note;
  return add(std::move(c));
}

CheckRecord& Report::check_gt(const std::string& name, double value, double bound, const std::string& note) {
  CheckRecord c;
  c.name = name;
  c.value = value;
  c.bound = bound;
  c.margin = value - bound;
  c.status = std::isfinite(value) ? (value > bound ? Status::pass : Status::fail) : Status::inconclusive;
  c.note = note;
  return add(std::move(c));
}

CheckRecord& Report::check_true(const std::string& name, bool ok, const std::string& note) {
  CheckRecord c;
  c.name = name;
  c.value = ok ? 1.0 : 0.0;
  c.bound = 1.0;
  c.margin = ok ? 0.0 : -1.0;
  c.status = ok ? Status::pass : Status::fail;
  c.note = note;
  return add(std::move(c));
}

bool Report::any_fail() const {
  for (const CheckRecord& c : checks) {
    if (c.status == Status::fail) return true;
  }
  return false;
}

nlohmann::json Report::to_json(bool timings) const {
  nlohmann::json j = nlohmann::json::object();
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = {{"name", "chaoslab"}, {"version", kToolVersion}};
  j["command"] = command;
  j["config"] = config;
  j["environment"] = environment_fingerprint();
  j["checks"] = nlohmann::json::array();
  for (const CheckRecord& c : checks) {
    nlohmann::json r = {{"name", c.name},   {"status", to_string(c.status)}, {"value", c.value},
                        {"bound", c.bound}, {"margin", c.margin},            {"note", c.note}};
    if (timings && c.runtime) r["runtime"] = *c.runtime;
    j["checks"].push_back(std::move(r));
  }
  j["data"] = data;
  bool fail = false, inconclusive = false;
  for (const CheckRecord& c : checks) {
    fail = fail || c.status == Status::fail;
    inconclusive = inconclusive || c.status == Status::inconclusive;
  }
  j["status"] = fail ? "fail" : (inconclusive ? "inconclusive" : "pass");
  return j;
}

namespace {

void dump_into(const nlohmann::json& j, std::string& out, int depth) {
  const std::string pad(static_cast<size_t>(2 * (depth + 1)), ' ');
  const std::string pad_close(static_cast<size_t>(2 * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      // nlohmann objects are std::map backed, but sort explicitly anyway.
      std::map<std::string, const nlohmann::json*> sorted;
      for (auto it = j.begin(); it != j.end(); ++it) sorted.emplace(it.key(), &it.value());
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : sorted) {
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::json(k).dump() + ": ";
        dump_into(*v, out, depth + 1);
      }
      out += "\n" + pad_close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_into(j[i], out, depth + 1);
      }
      out += "\n" + pad_close + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isnan(v)) {
        out += "\"nan\"";
      } else if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
      } else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
        std::string s(buf);
        // Keep the value a JSON float so that readers do not narrow it.
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        out += s;
      }
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& j) {
  std::string out;
  dump_into(j, out, 0);
  out += "\n";
  return out;
}

std::string environment_fingerprint() {
  std::ostringstream s;
#if defined(__clang__)
  s << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  s << "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
  s << "unknown-compiler";
#endif
  s << "; eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION;
  s << "; c++ " << __cplusplus;
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error("write to " + path + " failed");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  char buf[40];
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", r[i]);
      out += (i ? "," : "") + std::string(buf);
    }
    out += "\n";
  }
  write_text(path, out);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed JSON in " + path + ": " + e.what());
  }
}

int worker_count(int configured) {
  int w = configured;
  if (const char* env = std::getenv("CHAOSLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) w = static_cast<int>(v);
  }
  return std::max(1, w);
}

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  if (count <= 0) return;
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::scoped_lock lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace chaoslab
