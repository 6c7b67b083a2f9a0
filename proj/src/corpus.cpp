#include "anvaya/corpus.hpp"

#include "anvaya/error.hpp"
#include "anvaya/iast.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace anvaya {

namespace {

std::string checked_text(std::string_view raw, std::string_view field, const std::string& id,
                         std::size_t line) {
    std::string text = normalize_iast(raw);
    const auto check = validate_iast(text);
    if (!check.ok()) {
        const auto& bad = check.violations.front();
        char code[16];
        std::snprintf(code, sizeof code, "U+%04X", static_cast<unsigned>(bad.code_point));
        throw CorpusError(line, "record '" + id + "': invalid IAST character '" + bad.character +
                                    "' (" + code + ") at position " +
                                    std::to_string(bad.position) + " of " + std::string(field));
    }
    return text;
}

void normalize_annotation(AnnotatedSentence& sentence, const std::string& id, std::size_t line) {
    for (auto& token : sentence.tokens) token.surface = checked_text(token.surface, "annotation", id, line);
    try {
        validate_sentence(sentence);
    } catch (const AnnotationError& e) {
        throw CorpusError(line, "record '" + id + "': " + e.what());
    }
}

VerseRecord parse_jsonl_line(const std::string& text, std::size_t line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorpusError(line, std::string("malformed json: ") + e.what());
    }
    if (!j.is_object()) throw CorpusError(line, "expected a json object");

    auto required_string = [&](const char* key) {
        if (!j.contains(key)) throw CorpusError(line, std::string("missing field '") + key + "'");
        if (!j[key].is_string()) throw CorpusError(line, std::string("field '") + key + "' must be a string");
        return j[key].get<std::string>();
    };

    VerseRecord r;
    r.id = required_string("id");
    if (r.id.empty()) throw CorpusError(line, "empty id");
    r.verse = checked_text(required_string("verse"), "verse", r.id, line);
    r.source = required_string("source");
    if (j.contains("prose") && !j["prose"].is_null()) {
        if (!j["prose"].is_string()) throw CorpusError(line, "field 'prose' must be a string");
        r.prose = checked_text(j["prose"].get<std::string>(), "prose", r.id, line);
    }
    if (j.contains("annotation") && !j["annotation"].is_null()) {
        try {
            r.annotation = j["annotation"].get<AnnotatedSentence>();
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(line, "record '" + r.id + "': malformed annotation: " + e.what());
        } catch (const AnnotationError& e) {
            throw CorpusError(line, "record '" + r.id + "': " + e.what());
        }
        normalize_annotation(*r.annotation, r.id, line);
    }
    return r;
}

VerseRecord parse_tsv_line(const std::string& text, std::size_t line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = text.find('\t', start);
        fields.push_back(text.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3)
        throw CorpusError(line, "expected 2 or 3 tab-separated columns, found " +
                                    std::to_string(fields.size()));
    VerseRecord r;
    r.id = fields[0];
    if (r.id.empty()) throw CorpusError(line, "empty id");
    r.verse = checked_text(fields[1], "verse", r.id, line);
    if (fields.size() == 3 && !collapse_whitespace(fields[2]).empty())
        r.prose = checked_text(fields[2], "prose", r.id, line);
    return r;
}

}  // namespace

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "tsv") return CorpusFormat::tsv;
    return std::nullopt;
}

std::vector<VerseRecord> read_corpus(std::istream& in, CorpusFormat format) {
    std::vector<VerseRecord> records;
    std::set<std::string> seen;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (collapse_whitespace(text).empty()) continue;
        VerseRecord r = format == CorpusFormat::jsonl ? parse_jsonl_line(text, line)
                                                      : parse_tsv_line(text, line);
        if (collapse_whitespace(r.verse).empty())
            throw CorpusError(line, "record '" + r.id + "': empty verse");
        if (!seen.insert(r.id).second) throw CorpusError(line, "duplicate id '" + r.id + "'");
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<VerseRecord> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError(0, "cannot open corpus file " + path.string());
    return read_corpus(in, format);
}

nlohmann::json record_to_json(const VerseRecord& record) {
    nlohmann::json j{{"id", record.id}, {"verse", record.verse}, {"source", record.source}};
    if (record.prose) j["prose"] = *record.prose;
    if (record.annotation) j["annotation"] = *record.annotation;
    return j;
}

void write_jsonl(std::ostream& out, const std::vector<VerseRecord>& records) {
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

CorpusStats corpus_stats(const std::vector<VerseRecord>& records) {
    CorpusStats stats;
    std::size_t verse_tokens = 0;
    std::size_t prose_tokens = 0;
    for (const auto& r : records) {
        ++stats.records;
        ++stats.per_source[r.source];
        if (r.annotation) ++stats.annotated;
        verse_tokens += split_whitespace(r.verse).size();
        if (r.prose) {
            ++stats.with_prose;
            prose_tokens += split_whitespace(*r.prose).size();
        }
    }
    if (stats.records)
        stats.mean_verse_tokens = static_cast<double>(verse_tokens) / static_cast<double>(stats.records);
    if (stats.with_prose)
        stats.mean_prose_tokens = static_cast<double>(prose_tokens) / static_cast<double>(stats.with_prose);
    return stats;
}

}  // namespace anvaya
