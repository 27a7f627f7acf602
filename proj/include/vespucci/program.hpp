#pragma once

#include "vespucci/notebook.hpp"

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vespucci {

/// A (cell, line) position inside a notebook. Lines are 1-based.
struct CellPosition {
  int cell_index = 0;
  int local_line = 1;

  auto operator<=>(const CellPosition &) const = default;
};

struct LineMapEntry {
  int global_line = 0;
  int cell_index = 0;
  int local_line = 0;

  bool operator==(const LineMapEntry &) const = default;
};

/// Bidirectional mapping between lines of the concatenated program and the
/// code cells they came from.
class LineMap {
public:
  /// Appends the next program line. Lines of one cell must be appended
  /// contiguously and in order.
  void append(int cell_index, int local_line);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<LineMapEntry> &entries() const { return entries_; }

  /// Throws std::out_of_range outside 1..size().
  CellPosition to_cell(int global_line) const;
  /// Program line of a cell line, if the cell contributed that line.
  std::optional<int> to_global(int cell_index, int local_line) const;
  /// Program lines at which a new cell begins, ascending.
  std::vector<int> cell_start_lines() const;

  bool operator==(const LineMap &other) const { return entries_ == other.entries_; }

private:
  struct Span {
    int first_global = 0;
    int line_count = 0;
  };
  std::vector<LineMapEntry> entries_;
  std::map<int, Span> spans_;
};

struct Program {
  std::string text;
  LineMap map;
};

/// Concatenates the sanitized sources of all code cells in document order.
Program build_program(const Notebook &nb);

/// Throws std::out_of_range when global_line is not in the map.
CellPosition map_line(const LineMap &map, int global_line);

} // namespace vespucci
