#pragma once

#include "anvaya/annotation.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace anvaya {

struct VerseRecord {
    std::string id;
    std::string verse;
    std::optional<std::string> prose;
    std::string source;
    std::optional<AnnotatedSentence> annotation;

    bool operator==(const VerseRecord&) const = default;
};

enum class CorpusFormat { jsonl, tsv };

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);

/// Reads a corpus in file order. Text fields are NFC-normalized before
/// validation. Throws CorpusError for malformed lines (with the 1-based line
/// number), duplicate ids and characters outside the IAST repertoire.
/// Blank lines are skipped. TSV rows are `id<TAB>verse<TAB>prose` with an
/// optional (possibly empty) prose column; TSV records get source "".
std::vector<VerseRecord> load_corpus(const std::filesystem::path& path, CorpusFormat format);
std::vector<VerseRecord> read_corpus(std::istream& in, CorpusFormat format);

void write_jsonl(std::ostream& out, const std::vector<VerseRecord>& records);

nlohmann::json record_to_json(const VerseRecord& record);

struct CorpusStats {
    std::size_t records = 0;
    std::size_t annotated = 0;
    std::size_t with_prose = 0;
    std::map<std::string, std::size_t> per_source;
    double mean_verse_tokens = 0.0;  // whitespace tokens per verse
    double mean_prose_tokens = 0.0;  // over records that carry prose

    bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(const std::vector<VerseRecord>& records);

}  // namespace anvaya
