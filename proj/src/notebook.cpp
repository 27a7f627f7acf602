#include "vespucci/notebook.hpp"

#include "vespucci/errors.hpp"

#include <algorithm>
#include <json.hpp>

namespace vespucci {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string &what) {
  throw IngestError(IngestError::Kind::MalformedJson, what);
}

bool is_blank_line(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\f' || c == '\v'; });
}

std::string_view trim_left(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\f'))
    ++i;
  return s.substr(i);
}

std::string_view trim_right(std::string_view s) {
  std::size_t n = s.size();
  while (n > 0 && (s[n - 1] == ' ' || s[n - 1] == '\t' || s[n - 1] == '\f'))
    --n;
  return s.substr(0, n);
}

// nbformat allows multiline strings either as one string or as a list of
// strings that are concatenated verbatim.
std::string join_multiline(const json &value, const std::string &field) {
  if (value.is_string())
    return value.get<std::string>();
  if (!value.is_array())
    malformed("field '" + field + "' must be a string or a list of strings");
  std::string out;
  for (const auto &piece : value) {
    if (!piece.is_string())
      malformed("field '" + field + "' must be a string or a list of strings");
    out += piece.get_ref<const std::string &>();
  }
  return out;
}

std::string truncate_utf8(std::string text, std::size_t limit) {
  if (text.size() <= limit)
    return text;
  std::size_t cut = limit;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80)
    --cut;
  text.resize(cut);
  return text;
}

std::optional<std::int64_t> parse_execution_count(const json &cell, const char *key) {
  auto it = cell.find(key);
  if (it == cell.end() || it->is_null())
    return std::nullopt;
  if (!it->is_number_integer())
    malformed(std::string("'") + key + "' must be an integer or null");
  auto value = it->get<std::int64_t>();
  if (value < 0)
    malformed(std::string("'") + key + "' must be non-negative");
  return value;
}

std::optional<OutputKind> output_kind_of(std::string_view type) {
  if (type == "stream")
    return OutputKind::Stream;
  if (type == "execute_result" || type == "pyout")
    return OutputKind::ExecuteResult;
  if (type == "display_data")
    return OutputKind::DisplayData;
  if (type == "error" || type == "pyerr")
    return OutputKind::Error;
  return std::nullopt;
}

Output parse_output(const json &raw, const ParseOptions &options, std::vector<std::string> &warnings,
                    int cell_index) {
  if (!raw.is_object())
    malformed("output of cell " + std::to_string(cell_index) + " is not an object");
  auto type_it = raw.find("output_type");
  if (type_it == raw.end() || !type_it->is_string())
    malformed("output of cell " + std::to_string(cell_index) + " has no output_type");
  auto kind = output_kind_of(type_it->get_ref<const std::string &>());
  if (!kind) {
    warnings.push_back("cell " + std::to_string(cell_index) + ": unknown output_type '" +
                       type_it->get<std::string>() + "' read as display_data");
    kind = OutputKind::DisplayData;
  }

  Output out;
  out.kind = *kind;
  std::optional<std::string> text;
  switch (out.kind) {
  case OutputKind::Stream:
    out.mime_kinds.insert("text/plain");
    if (auto it = raw.find("text"); it != raw.end())
      text = join_multiline(*it, "text");
    break;
  case OutputKind::ExecuteResult:
  case OutputKind::DisplayData:
    if (auto it = raw.find("data"); it != raw.end() && it->is_object()) {
      for (const auto &[mime, payload] : it->items()) {
        out.mime_kinds.insert(mime);
        if (mime == "text/plain" && (payload.is_string() || payload.is_array()))
          text = join_multiline(payload, "text/plain");
      }
    } else {
      // nbformat 3 stores mime bundles flat on the output object.
      for (const auto &[key, payload] : raw.items()) {
        if (key == "output_type" || key == "metadata" || key == "prompt_number")
          continue;
        out.mime_kinds.insert(key);
        if (key == "text" && (payload.is_string() || payload.is_array()))
          text = join_multiline(payload, "text");
      }
    }
    break;
  case OutputKind::Error: {
    std::string name = raw.value("ename", std::string());
    std::string value = raw.value("evalue", std::string());
    if (!name.empty() || !value.empty())
      text = name + ": " + value;
    break;
  }
  }
  if (text)
    out.text_preview = truncate_utf8(std::move(*text), options.output_preview_limit);
  return out;
}

Cell parse_cell(const json &raw, int index, int major, const ParseOptions &options,
                std::vector<std::string> &warnings) {
  if (!raw.is_object())
    malformed("cell " + std::to_string(index) + " is not an object");

  Cell cell;
  cell.index = index;

  auto type_it = raw.find("cell_type");
  if (type_it == raw.end() || !type_it->is_string()) {
    warnings.push_back("cell " + std::to_string(index) + ": missing cell_type, treated as raw");
    cell.kind = CellKind::Raw;
  } else {
    const auto &type = type_it->get_ref<const std::string &>();
    if (type == "code")
      cell.kind = CellKind::Code;
    else if (type == "markdown" || type == "heading")
      cell.kind = CellKind::Markdown;
    else if (type == "raw")
      cell.kind = CellKind::Raw;
    else {
      warnings.push_back("cell " + std::to_string(index) + ": unknown cell_type '" + type +
                         "', treated as raw");
      cell.kind = CellKind::Raw;
    }
  }

  if (auto it = raw.find("id"); it != raw.end() && it->is_string())
    cell.id = it->get<std::string>();

  const char *source_key = (major == 3 && cell.kind == CellKind::Code) ? "input" : "source";
  if (auto it = raw.find(source_key); it != raw.end())
    cell.source_lines = split_source_lines(join_multiline(*it, source_key));

  if (cell.kind != CellKind::Code)
    return cell;

  cell.execution_count = parse_execution_count(raw, major == 3 ? "prompt_number" : "execution_count");
  if (auto it = raw.find("outputs"); it != raw.end() && !it->is_null()) {
    if (!it->is_array())
      malformed("'outputs' of cell " + std::to_string(index) + " is not a list");
    for (const auto &output : *it)
      cell.outputs.push_back(parse_output(output, options, warnings, index));
  }
  return cell;
}

} // namespace

std::string Cell::text() const {
  std::string out;
  for (std::size_t i = 0; i < source_lines.size(); ++i) {
    if (i > 0)
      out += '\n';
    out += source_lines[i];
  }
  return out;
}

bool Cell::is_blank() const {
  return std::all_of(source_lines.begin(), source_lines.end(),
                     [](const std::string &line) { return is_blank_line(line); });
}

std::size_t Notebook::code_cell_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const Cell &c) { return c.kind == CellKind::Code; }));
}

std::size_t Notebook::markdown_cell_count() const {
  return static_cast<std::size_t>(std::count_if(
      cells.begin(), cells.end(), [](const Cell &c) { return c.kind == CellKind::Markdown; }));
}

std::vector<std::string> split_source_lines(std::string_view text) {
  std::vector<std::string> lines;
  if (text.empty())
    return lines;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n')
        ++i;
      lines.push_back(std::move(current));
      current.clear();
    } else if (c == '\n') {
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  lines.push_back(std::move(current));
  return lines;
}

Notebook parse_notebook(std::string_view bytes, const std::filesystem::path &path,
                        const ParseOptions &options) {
  Notebook nb;
  nb.path = path;
  nb.name_stem = path.stem().string();
  if (nb.name_stem.empty())
    throw std::invalid_argument("notebook path has an empty file name: '" + path.string() + "'");

  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error &e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    malformed("top-level JSON value is not an object");

  auto major_it = doc.find("nbformat");
  if (major_it == doc.end() || !major_it->is_number_integer())
    malformed("missing integer 'nbformat'");
  nb.format_version.major = major_it->get<int>();
  if (auto it = doc.find("nbformat_minor"); it != doc.end() && it->is_number_integer())
    nb.format_version.minor = it->get<int>();
  else
    nb.format_version.minor = 0;
  if (nb.format_version.major < 3)
    throw IngestError(IngestError::Kind::UnsupportedFormat,
                      "nbformat " + std::to_string(nb.format_version.major) + " is not supported");

  std::vector<const json *> raw_cells;
  if (nb.format_version.major == 3) {
    auto ws = doc.find("worksheets");
    if (ws == doc.end() || !ws->is_array())
      malformed("nbformat 3 document without 'worksheets' list");
    for (const auto &sheet : *ws) {
      if (!sheet.is_object())
        malformed("worksheet is not an object");
      auto cells = sheet.find("cells");
      if (cells == sheet.end() || !cells->is_array())
        malformed("worksheet without 'cells' list");
      for (const auto &cell : *cells)
        raw_cells.push_back(&cell);
    }
  } else {
    auto cells = doc.find("cells");
    if (cells == doc.end())
      malformed("missing 'cells'");
    if (!cells->is_array())
      malformed("'cells' is not a list");
    for (const auto &cell : *cells)
      raw_cells.push_back(&cell);
  }

  nb.cells.reserve(raw_cells.size());
  for (std::size_t i = 0; i < raw_cells.size(); ++i)
    nb.cells.push_back(
        parse_cell(*raw_cells[i], static_cast<int>(i), nb.format_version.major, options, nb.warnings));

  if (auto meta = doc.find("metadata"); meta != doc.end() && meta->is_object()) {
    if (auto ks = meta->find("kernelspec"); ks != meta->end() && ks->is_object()) {
      if (auto name = ks->find("name"); name != ks->end() && name->is_string())
        nb.metadata_kept["kernel_name"] = name->get<std::string>();
      if (auto lang = ks->find("language"); lang != ks->end() && lang->is_string())
        nb.metadata_kept["language"] = lang->get<std::string>();
    }
    if (auto li = meta->find("language_info"); li != meta->end() && li->is_object()) {
      if (auto name = li->find("name"); name != li->end() && name->is_string())
        nb.metadata_kept.try_emplace("language", name->get<std::string>());
    }
  }
  return nb;
}

std::vector<std::string> sanitize_cell_source(const Cell &cell) {
  std::vector<std::string> out = cell.source_lines;

  auto first = std::find_if(out.begin(), out.end(), [](const std::string &l) { return !is_blank_line(l); });
  if (first != out.end() && trim_left(*first).substr(0, 2) == "%%") {
    std::fill(out.begin(), out.end(), std::string(kMagicPlaceholder));
    return out;
  }

  for (auto &line : out) {
    std::string_view body = trim_left(line);
    if (body.empty())
      continue;
    char lead = body.front();
    bool magic = lead == '%' || lead == '!' || lead == '?' || trim_right(body).back() == '?';
    if (magic)
      line = std::string(kMagicPlaceholder);
  }
  return out;
}

std::string_view to_string(CellKind kind) {
  switch (kind) {
  case CellKind::Code:
    return "code";
  case CellKind::Markdown:
    return "markdown";
  case CellKind::Raw:
    return "raw";
  }
  return "raw";
}

} // namespace vespucci
