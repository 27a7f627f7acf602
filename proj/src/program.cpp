#include "vespucci/program.hpp"

#include <stdexcept>

namespace vespucci {

void LineMap::append(int cell_index, int local_line) {
  int global_line = static_cast<int>(entries_.size()) + 1;
  auto [it, inserted] = spans_.try_emplace(cell_index, Span{global_line, 0});
  if (!inserted && it->second.first_global + it->second.line_count != global_line)
    throw std::logic_error("line map: cell " + std::to_string(cell_index) + " appended non-contiguously");
  if (local_line != it->second.line_count + 1)
    throw std::logic_error("line map: cell lines must be appended in order");
  ++it->second.line_count;
  entries_.push_back({global_line, cell_index, local_line});
}

CellPosition LineMap::to_cell(int global_line) const {
  if (global_line < 1 || static_cast<std::size_t>(global_line) > entries_.size())
    throw std::out_of_range("program line " + std::to_string(global_line) + " outside 1.." +
                            std::to_string(entries_.size()));
  const auto &e = entries_[static_cast<std::size_t>(global_line - 1)];
  return {e.cell_index, e.local_line};
}

std::optional<int> LineMap::to_global(int cell_index, int local_line) const {
  auto it = spans_.find(cell_index);
  if (it == spans_.end() || local_line < 1 || local_line > it->second.line_count)
    return std::nullopt;
  return it->second.first_global + local_line - 1;
}

std::vector<int> LineMap::cell_start_lines() const {
  std::vector<int> out;
  out.reserve(spans_.size());
  for (const auto &[cell, span] : spans_)
    out.push_back(span.first_global);
  return out;
}

Program build_program(const Notebook &nb) {
  Program program;
  for (const auto &cell : nb.cells) {
    if (cell.kind != CellKind::Code)
      continue;
    auto lines = sanitize_cell_source(cell);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      program.text += lines[i];
      program.text += '\n';
      program.map.append(cell.index, static_cast<int>(i) + 1);
    }
  }
  return program;
}

CellPosition map_line(const LineMap &map, int global_line) { return map.to_cell(global_line); }

} // namespace vespucci
