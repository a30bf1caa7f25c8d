#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "diffvor/error.hpp"
#include "diffvor/geometry.hpp"

namespace diffvor {

// Streaming JSON writer with pinned formatting: keys in call order, doubles
// as %.17g (round-trips exactly), no whitespace. Output is byte-stable for
// identical inputs, which the artifact files rely on.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);

  JsonWriter& value(double v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }

  JsonWriter& value(Vec2 p) {
    begin_array().value(p.x).value(p.y).end_array();
    return *this;
  }
  template <typename Range>
  JsonWriter& value_list(const Range& range) {
    begin_array();
    for (const auto& item : range) value(item);
    return end_array();
  }

  const std::string& str() const { return out_; }

 private:
  void before_item();

  std::string out_;
  std::vector<char> stack_;        // '{' or '['
  std::vector<bool> needs_comma_;
  bool pending_key_ = false;
};

std::string format_double(double v);  // %.17g, throws on non-finite

}  // namespace diffvor
