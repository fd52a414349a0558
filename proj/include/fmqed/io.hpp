#ifndef FMQED_IO_HPP
#define FMQED_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "fmqed/types.hpp"

namespace fmqed {

// Shortest round-trip text form of a double; identical bytes on rerun.
std::string format_double(double v);

class CsvTable {
 public:
  class Row {
   public:
    explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
    Row& operator<<(double v);
    Row& operator<<(int v);
    Row& operator<<(long v);
    Row& operator<<(long long v);
    Row& operator<<(size_t v);
    Row& operator<<(const std::string& v);
    Row& operator<<(const char* v) { return *this << std::string(v); }

   private:
    std::vector<std::string>& cells_;
  };

  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  Row row();
  const std::vector<std::string>& columns() const { return columns_; }
  size_t size() const { return rows_.size(); }
  const std::vector<std::string>& cells(size_t r) const { return rows_.at(r); }
  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace fmqed

#endif
