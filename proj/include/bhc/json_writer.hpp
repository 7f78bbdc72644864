#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bhc {

// Minimal JSON emitter with insertion-ordered keys and doubles printed via
// %.17g, so identical runs produce byte-identical files and every double
// round-trips. Non-finite doubles become null.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);

  JsonWriter& value(double v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v);
  JsonWriter& value(bool v);
  JsonWriter& value(int v);
  JsonWriter& value(long v);
  JsonWriter& value(uint64_t v);

  JsonWriter& kv(const std::string& k, double v) { return key(k).value(v); }
  JsonWriter& kv(const std::string& k, const std::string& v) { return key(k).value(v); }
  JsonWriter& kv(const std::string& k, const char* v) { return key(k).value(v); }
  JsonWriter& kv(const std::string& k, bool v) { return key(k).value(v); }
  JsonWriter& kv(const std::string& k, int v) { return key(k).value(v); }
  JsonWriter& kv(const std::string& k, long v) { return key(k).value(v); }
  JsonWriter& kv(const std::string& k, uint64_t v) { return key(k).value(v); }

  std::string str() const { return out_; }

  static std::string escape(const std::string& s);
  static std::string format_double(double v);

 private:
  void separator();
  std::string out_;
  std::vector<bool> first_in_scope_{true};
};

}  // namespace bhc
