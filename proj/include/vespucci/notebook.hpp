#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vespucci {

enum class CellKind { Code, Markdown, Raw };
enum class OutputKind { Stream, ExecuteResult, DisplayData, Error };

struct Output {
  OutputKind kind = OutputKind::Stream;
  std::set<std::string> mime_kinds;
  std::optional<std::string> text_preview;

  bool operator==(const Output &) const = default;
};

struct Cell {
  int index = 0;
  std::optional<std::string> id;
  CellKind kind = CellKind::Raw;
  /// Lines without terminators; joining with '\n' gives back the cell text.
  std::vector<std::string> source_lines;
  std::optional<std::int64_t> execution_count;
  std::vector<Output> outputs;

  std::string text() const;
  /// True when the source is empty or whitespace only.
  bool is_blank() const;

  bool operator==(const Cell &) const = default;
};

struct FormatVersion {
  int major = 4;
  int minor = 0;

  bool operator==(const FormatVersion &) const = default;
};

struct Notebook {
  std::filesystem::path path;
  std::string name_stem;
  FormatVersion format_version;
  std::vector<Cell> cells;
  /// Kernel name and language, when the file records them.
  std::map<std::string, std::string> metadata_kept;
  /// Non-fatal ingestion problems (e.g. a cell without cell_type).
  std::vector<std::string> warnings;

  std::size_t code_cell_count() const;
  std::size_t markdown_cell_count() const;

  bool operator==(const Notebook &) const = default;
};

struct ParseOptions {
  std::size_t output_preview_limit = 1024;
};

/// Parses nbformat 4.x (and 3.x) JSON. Throws IngestError.
Notebook parse_notebook(std::string_view bytes, const std::filesystem::path &path,
                        const ParseOptions &options = {});

/// Splits cell text into lines, normalizing "\r\n" and lone "\r" to "\n".
/// An empty text has zero lines.
std::vector<std::string> split_source_lines(std::string_view text);

/// Placeholder written in place of IPython magics and shell escapes.
inline constexpr std::string_view kMagicPlaceholder = "#~magic";

/// Replaces non-Python lines of a code cell with kMagicPlaceholder.
/// The result always has exactly as many lines as the input.
std::vector<std::string> sanitize_cell_source(const Cell &cell);

std::string_view to_string(CellKind kind);

} // namespace vespucci
