#include "d2ke/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "d2ke/errors.hpp"

namespace d2ke {

std::string_view format_name(Format format) {
  switch (format) {
    case Format::kTimeSeries:
      return "ts";
    case Format::kString:
      return "str";
    case Format::kVectorSet:
      return "vset";
  }
  return "unknown";
}

Format parse_format(std::string_view name) {
  if (name == "ts") return Format::kTimeSeries;
  if (name == "str") return Format::kString;
  if (name == "vset") return Format::kVectorSet;
  throw ConfigError("unknown format '" + std::string(name) + "'");
}

Format format_for_kind(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kTimeSeries:
      return Format::kTimeSeries;
    case ObjectKind::kString:
      return Format::kString;
    case ObjectKind::kVectorSet:
      return Format::kVectorSet;
  }
  return Format::kString;
}

ObjectKind kind_for_format(Format format) {
  switch (format) {
    case Format::kTimeSeries:
      return ObjectKind::kTimeSeries;
    case Format::kString:
      return ObjectKind::kString;
    case Format::kVectorSet:
      return ObjectKind::kVectorSet;
  }
  return ObjectKind::kString;
}

Format infer_format(const std::string& path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".ts.tsv") || ends_with(".tsv")) return Format::kTimeSeries;
  if (ends_with(".str.txt") || ends_with(".txt")) return Format::kString;
  if (ends_with(".vset.jsonl") || ends_with(".jsonl")) return Format::kVectorSet;
  throw ConfigError("cannot infer dataset format from '" + path + "'");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write to '" + path + "' failed");
}

std::string default_alphabet(std::uint32_t size) {
  static constexpr std::string_view kSymbols =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  if (size > kSymbols.size()) {
    throw std::invalid_argument("alphabet of size " + std::to_string(size) +
                                " has no default printable symbols");
  }
  return std::string(kSymbols.substr(0, size));
}

namespace {

constexpr std::string_view kWhitespace = " \t\r";

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(kWhitespace);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(kWhitespace);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  }
  return value;
}

struct RawLine {
  std::size_t number;
  std::string_view text;
};

// Splits into lines, enforcing the per-line size cap.
std::vector<RawLine> split_lines(std::string_view text) {
  std::vector<RawLine> lines;
  std::size_t pos = 0, number = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++number;
    if (nl - pos > kMaxLineBytes) {
      throw ParseError(number, "line exceeds " + std::to_string(kMaxLineBytes) + " bytes");
    }
    lines.push_back({number, text.substr(pos, nl - pos)});
    pos = nl + 1;
  }
  return lines;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

// Maps original label values to contiguous class indices.
void finalize_labels(Dataset& data, const std::vector<long long>& raw) {
  std::vector<long long> values = raw;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  data.labels.clear();
  data.labels.reserve(raw.size());
  for (auto v : raw) {
    auto it = std::lower_bound(values.begin(), values.end(), v);
    data.labels.push_back(static_cast<int>(it - values.begin()));
  }
  data.num_classes = values.size();
  data.meta.label_values = std::move(values);
  data.ids.resize(data.objects.size());
  for (std::size_t i = 0; i < data.ids.size(); ++i) data.ids[i] = i;
}

}  // namespace

Dataset parse_dataset(std::string_view text, ObjectKind kind, Format format,
                      const std::string& source_name) {
  if (kind_for_format(format) != kind) {
    throw ConfigError("format '" + std::string(format_name(format)) + "' does not hold " +
                      std::string(kind_name(kind)) + " objects");
  }
  Dataset data;
  data.kind = kind;
  data.meta.source_path = source_name;
  data.meta.checksum = fnv1a64(text);

  std::vector<long long> raw_labels;
  std::optional<std::string> alphabet;
  std::map<char, std::uint32_t> symbol_index;
  std::optional<std::size_t> shared_width;
  std::size_t width_line = 0;

  auto check_width = [&](std::size_t width, std::size_t line, const char* what) {
    if (!shared_width) {
      shared_width = width;
      width_line = line;
    } else if (*shared_width != width) {
      throw DimensionMismatch("line " + std::to_string(line) + ": " + what + " " +
                              std::to_string(width) + " differs from " +
                              std::to_string(*shared_width) + " on line " +
                              std::to_string(width_line));
    }
  };

  for (const auto& [number, raw] : split_lines(text)) {
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (format == Format::kString && line.substr(0, 9) == "#alphabet") {
        auto toks = split_ws(line.substr(9));
        if (toks.size() != 1) throw ParseError(number, "alphabet line needs one token");
        alphabet = std::string(toks[0]);
        for (std::size_t i = 0; i < alphabet->size(); ++i) {
          if (!symbol_index.emplace((*alphabet)[i], static_cast<std::uint32_t>(i)).second) {
            throw ParseError(number, "duplicate alphabet symbol");
          }
        }
      }
      continue;
    }

    switch (format) {
      case Format::kTimeSeries: {
        auto toks = split_ws(line);
        if (toks.size() < 3) throw ParseError(number, "expected <label> <T> <V> values");
        auto label = parse_number<long long>(toks[0], number, "label");
        auto steps = parse_number<std::size_t>(toks[1], number, "length T");
        auto vars = parse_number<std::size_t>(toks[2], number, "variable count V");
        if (steps == 0 || vars == 0) throw ParseError(number, "T and V must be >= 1");
        check_width(vars, number, "variable count");
        if (toks.size() - 3 != steps * vars) {
          throw ParseError(number, "expected " + std::to_string(steps * vars) +
                                       " values, found " + std::to_string(toks.size() - 3));
        }
        std::vector<double> values;
        values.reserve(steps * vars);
        for (std::size_t i = 3; i < toks.size(); ++i) {
          double v = parse_number<double>(toks[i], number, "value");
          if (!std::isfinite(v)) throw ParseError(number, "non-finite value");
          values.push_back(v);
        }
        data.objects.emplace_back(TimeSeries(steps, vars, std::move(values)));
        raw_labels.push_back(label);
        break;
      }
      case Format::kString: {
        if (!alphabet) throw ParseError(number, "string data before '#alphabet' line");
        auto sep = line.find_first_of(" \t");
        auto label_tok = line.substr(0, sep);
        auto label = parse_number<long long>(label_tok, number, "label");
        auto rest = sep == std::string_view::npos ? std::string_view{} : trim(line.substr(sep));
        std::vector<std::uint32_t> symbols;
        symbols.reserve(rest.size());
        for (char c : rest) {
          auto it = symbol_index.find(c);
          if (it == symbol_index.end()) {
            throw ParseError(number, std::string("symbol '") + c + "' not in alphabet");
          }
          symbols.push_back(it->second);
        }
        data.objects.emplace_back(
            SymbolString(std::move(symbols), static_cast<std::uint32_t>(alphabet->size())));
        raw_labels.push_back(label);
        break;
      }
      case Format::kVectorSet: {
        nlohmann::json rec;
        try {
          rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
          throw ParseError(number, std::string("invalid record: ") + e.what());
        }
        if (!rec.is_object() || !rec.contains("label") || !rec.contains("elements") ||
            !rec["label"].is_number_integer() || !rec["elements"].is_array()) {
          throw ParseError(number, "record needs integer 'label' and array 'elements'");
        }
        const auto& elems = rec["elements"];
        if (elems.empty()) throw ParseError(number, "vector set is empty");
        std::vector<double> flat;
        std::size_t dim = 0;
        for (std::size_t e = 0; e < elems.size(); ++e) {
          const auto& v = elems[e];
          if (!v.is_array() || v.empty()) throw ParseError(number, "element is not a vector");
          if (e == 0) dim = v.size();
          if (v.size() != dim) {
            throw DimensionMismatch("line " + std::to_string(number) + ": element " +
                                    std::to_string(e) + " has dimension " +
                                    std::to_string(v.size()) + ", expected " +
                                    std::to_string(dim));
          }
          for (const auto& x : v) {
            if (!x.is_number()) throw ParseError(number, "non-numeric element entry");
            double d = x.get<double>();
            if (!std::isfinite(d)) throw ParseError(number, "non-finite element entry");
            flat.push_back(d);
          }
        }
        check_width(dim, number, "element dimension");
        data.objects.emplace_back(VectorSet(dim, std::move(flat)));
        raw_labels.push_back(rec["label"].get<long long>());
        break;
      }
    }
  }

  if (data.objects.empty()) throw EmptyDataset("'" + source_name + "' contains no objects");
  if (alphabet) data.meta.extra["alphabet"] = *alphabet;
  finalize_labels(data, raw_labels);
  data.validate();
  return data;
}

Dataset load_dataset(const std::string& path, ObjectKind kind, Format format) {
  return parse_dataset(read_file(path), kind, format, path);
}

Dataset load_dataset(const std::string& path) {
  auto format = infer_format(path);
  return load_dataset(path, kind_for_format(format), format);
}

std::string format_dataset(const Dataset& data, const std::vector<std::string>& header_comments) {
  std::string out;
  for (const auto& c : header_comments) {
    out += '#';
    out += c;
    out += '\n';
  }
  auto label_text = [&](int label) {
    if (static_cast<std::size_t>(label) < data.meta.label_values.size()) {
      return std::to_string(data.meta.label_values[label]);
    }
    return std::to_string(label);
  };

  if (data.kind == ObjectKind::kString) {
    std::string alphabet;
    if (auto it = data.meta.extra.find("alphabet"); it != data.meta.extra.end()) {
      alphabet = it->second;
    } else if (!data.empty()) {
      alphabet = default_alphabet(data.objects.front().string().alphabet_size());
    }
    out += "#alphabet " + alphabet + "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& s = data.objects[i].string();
      if (s.alphabet_size() > alphabet.size()) {
        throw std::invalid_argument("recorded alphabet smaller than string alphabet size");
      }
      out += label_text(data.labels[i]);
      out += ' ';
      for (auto sym : s.symbols()) out += alphabet[sym];
      out += '\n';
    }
    return out;
  }

  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& obj = data.objects[i];
    if (data.kind == ObjectKind::kTimeSeries) {
      const auto& s = obj.series();
      out += label_text(data.labels[i]) + ' ' + std::to_string(s.steps()) + ' ' +
             std::to_string(s.vars());
      for (double v : s.values()) {
        out += ' ';
        out += format_double(v);
      }
    } else {
      const auto& set = obj.vector_set();
      out += "{\"label\": " + label_text(data.labels[i]) + ", \"elements\": [";
      for (std::size_t e = 0; e < set.size(); ++e) {
        if (e) out += ", ";
        out += '[';
        auto el = set.element(e);
        for (std::size_t k = 0; k < el.size(); ++k) {
          if (k) out += ", ";
          out += format_double(el[k]);
        }
        out += ']';
      }
      out += "]}";
    }
    out += '\n';
  }
  return out;
}

void write_dataset(const Dataset& data, const std::string& path,
                   const std::vector<std::string>& header_comments) {
  write_file(path, format_dataset(data, header_comments));
}

std::vector<std::string> read_header_comments(const std::string& path) {
  std::vector<std::string> out;
  auto text = read_file(path);
  for (const auto& [number, raw] : split_lines(text)) {
    auto line = trim(raw);
    if (line.empty() || line.front() != '#') continue;
    if (line.substr(0, 9) == "#alphabet") continue;
    out.emplace_back(line.substr(1));
  }
  return out;
}

}  // namespace d2ke
