#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace subpop {

/// Shortest-of-17-significant-digits decimal rendering (printf %.17g
/// semantics). Round-trips every finite double exactly.
std::string format_double(double v);

/// FNV-1a 64-bit digest, used for input fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

/// Minimal streaming JSON writer. Key order is insertion order and doubles go
/// through format_double, so equal inputs yield byte-identical documents.
/// Intentionally hand-rolled: general-purpose JSON libraries do not pin float
/// formatting, which the output contract requires.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();

  JsonWriter& key(std::string_view k);

  JsonWriter& value(double v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& null();

  template <typename T>
  JsonWriter& field(std::string_view k, const T& v) {
    key(k);
    return value(v);
  }

  std::string take() { return std::move(out_); }
  const std::string& str() const { return out_; }

 private:
  void separate();
  void write_escaped(std::string_view s);

  std::string out_;
  std::vector<bool> has_item_;  // one flag per open container
  bool pending_key_ = false;
};

}  // namespace subpop
