#pragma once

// Output helpers. Every floating value is written with 17 significant digits
// so that it round-trips exactly; JSON is serialized by hand for the same
// reason (and for a stable key order).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fracdecay/error.hpp"
#include "json.hpp"

namespace fracdecay {

inline std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void json_string(std::string& out, const std::string& s) {
  out += nlohmann::json(s).dump();
}

inline void json_write(std::string& out, const nlohmann::json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        json_string(out, it.key());
        out += ": ";
        json_write(out, it.value(), indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // arrays of scalars stay on one line
      bool scalars = true;
      for (const auto& e : j) scalars = scalars && !e.is_structured();
      out += scalars ? "[" : "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += scalars ? ", " : ",\n";
        if (!scalars) out += pad;
        json_write(out, j[i], indent, depth + 1);
      }
      out += scalars ? "]" : "\n" + close_pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      // JSON has no inf/nan
      out += std::isfinite(x) ? fmt17(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// JSON text with %.17g floats and nlohmann's (sorted) key order.
inline std::string to_json_text(const nlohmann::json& j, int indent = 2) {
  std::string out;
  detail::json_write(out, j, indent, 0);
  out += "\n";
  return out;
}

/// Simple CSV table; rows are pre-formatted strings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(std::vector<std::string> cells) {
    detail::require(cells.size() == header_.size(), ErrorCode::InvalidArgument, "CSV row width mismatch");
    rows_.push_back(std::move(cells));
  }

  [[nodiscard]] std::string text() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  out << text;
}

}  // namespace fracdecay
