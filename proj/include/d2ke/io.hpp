#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "d2ke/objects.hpp"

namespace d2ke {

// On-disk dataset formats, one per object kind:
//   ts    `<label> <T> <V> v11 ... vTV`            (.ts.tsv)
//   str   `#alphabet <chars>` head, `<label> <symbols>`  (.str.txt)
//   vset  `{"label": int, "elements": [[...], ...]}` (.vset.jsonl)
// Lines starting with '#' are comments, except the alphabet line.
enum class Format { kTimeSeries, kString, kVectorSet };

inline constexpr std::size_t kMaxLineBytes = 10u * 1024u * 1024u;

std::string_view format_name(Format format);
Format parse_format(std::string_view name);
Format format_for_kind(ObjectKind kind);
ObjectKind kind_for_format(Format format);
// Guess the format from a file name suffix; throws ConfigError if unknown.
Format infer_format(const std::string& path);

// Labels are remapped to contiguous class indices (ascending original value);
// the original values are kept in meta.label_values.
Dataset load_dataset(const std::string& path, ObjectKind kind, Format format);
Dataset load_dataset(const std::string& path);
Dataset parse_dataset(std::string_view text, ObjectKind kind, Format format,
                      const std::string& source_name = "<memory>");

// Canonical serialization. `header_comments` are written as `#<line>`
// before any data.
std::string format_dataset(const Dataset& data,
                           const std::vector<std::string>& header_comments = {});
void write_dataset(const Dataset& data, const std::string& path,
                   const std::vector<std::string>& header_comments = {});

// Comment lines (without the leading '#') in file order, alphabet excluded.
std::vector<std::string> read_header_comments(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Symbols used when a dataset has no recorded alphabet.
std::string default_alphabet(std::uint32_t size);

}  // namespace d2ke
