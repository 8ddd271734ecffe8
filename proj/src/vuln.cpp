#include "varcg/vuln.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include <json.hpp>

#include "varcg/errors.hpp"
#include "varcg/metrics.hpp"

namespace varcg {

namespace {

const std::regex& cve_pattern() {
    static const std::regex pattern("CVE-[0-9]{4}-[0-9]{4,}");
    return pattern;
}

}  // namespace

bool is_cve_id(const std::string& text) {
    return std::regex_match(text, cve_pattern());
}

std::vector<std::string> find_cve_ids(const std::string& text) {
    std::vector<std::string> ids;
    auto begin = std::sregex_iterator(text.begin(), text.end(), cve_pattern());
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        std::string id = it->str();
        if (std::find(ids.begin(), ids.end(), id) == ids.end())
            ids.push_back(std::move(id));
    }
    return ids;
}

// ---------------------------------------------------------------------------
// CVE manifest

namespace {

using nlohmann::json;

const json& require_member(const json& object, const std::string& key,
                           const std::string& path) {
    if (!object.is_object())
        throw ParseError("manifest: " + path + ": expected an object");
    auto it = object.find(key);
    if (it == object.end())
        throw ParseError("manifest: " + path + ": missing field '" + key + "'");
    return *it;
}

std::string require_text(const json& object, const std::string& key,
                         const std::string& path) {
    const json& value = require_member(object, key, path);
    if (!value.is_string())
        throw ParseError("manifest: " + path + "." + key + ": expected a string");
    return value.get<std::string>();
}

const json& require_list(const json& object, const std::string& key,
                         const std::string& path) {
    const json& value = require_member(object, key, path);
    if (!value.is_array())
        throw ParseError("manifest: " + path + "." + key + ": expected an array");
    return value;
}

}  // namespace

std::vector<CveRecord> parse_cve_manifest(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ParseError(std::string("manifest: invalid JSON: ") + err.what());
    }
    if (!root.is_array())
        throw ParseError("manifest: $: expected a top-level array");

    std::vector<CveRecord> records;
    std::set<std::string> seen_ids;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string cve_path = "$[" + std::to_string(i) + "]";
        const json& entry = root[i];
        CveRecord record;
        record.cve_id = require_text(entry, "cve_id", cve_path);
        if (!is_cve_id(record.cve_id))
            throw ParseError("manifest: " + cve_path + ".cve_id: malformed CVE id '" +
                             record.cve_id + "'");
        if (!seen_ids.insert(record.cve_id).second)
            throw ParseError("manifest: " + cve_path + ".cve_id: duplicate cve_id " +
                             record.cve_id);

        const json& commits = require_list(entry, "commits", cve_path);
        for (std::size_t j = 0; j < commits.size(); ++j) {
            const std::string commit_path =
                cve_path + ".commits[" + std::to_string(j) + "]";
            const json& centry = commits[j];
            CommitRecord commit;
            commit.commit_id = require_text(centry, "commit_id", commit_path);
            commit.message = require_text(centry, "message", commit_path);
            commit.cve_ids = find_cve_ids(commit.message);

            const json& files = require_list(centry, "files", commit_path);
            for (std::size_t k = 0; k < files.size(); ++k) {
                const std::string file_path =
                    commit_path + ".files[" + std::to_string(k) + "]";
                const json& fentry = files[k];
                FileDiff fd;
                fd.path = require_text(fentry, "path", file_path);
                const std::string diff_text = require_text(fentry, "diff", file_path);
                try {
                    fd.diff = parse_unified_diff(diff_text);
                } catch (const ParseError& err) {
                    throw ParseError("manifest: " + file_path + ".diff: " + err.what());
                }
                commit.file_diffs.push_back(std::move(fd));
            }
            record.commits.push_back(std::move(commit));
        }
        records.push_back(std::move(record));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Commit log

std::vector<CommitRecord> scan_commit_log(const std::string& export_text) {
    static const std::string kPrefix = std::string(1, '\0') + "COMMIT ";

    std::vector<CommitRecord> commits;
    CommitRecord current;
    bool in_commit = false;
    std::vector<std::string> message_lines;

    auto flush = [&] {
        if (!in_commit) return;
        std::string message;
        for (std::size_t i = 0; i < message_lines.size(); ++i) {
            if (i) message += '\n';
            message += message_lines[i];
        }
        current.message = std::move(message);
        current.cve_ids = find_cve_ids(current.message);
        if (!current.cve_ids.empty()) commits.push_back(std::move(current));
        current = CommitRecord{};
        message_lines.clear();
    };

    std::size_t pos = 0;
    while (pos <= export_text.size()) {
        if (pos == export_text.size()) break;
        std::size_t eol = export_text.find('\n', pos);
        std::size_t len = (eol == std::string::npos ? export_text.size() : eol) - pos;
        std::string line = export_text.substr(pos, len);
        if (!line.empty() && line.back() == '\r') line.pop_back();

        if (!line.empty() && line[0] == '\0') {
            if (line.compare(0, kPrefix.size(), kPrefix) != 0)
                throw ParseError("commit log: malformed record delimiter", pos);
            std::size_t id_end = line.find('\0', kPrefix.size());
            if (id_end == std::string::npos || id_end != line.size() - 1 ||
                id_end == kPrefix.size())
                throw ParseError("commit log: malformed record delimiter", pos);
            flush();
            in_commit = true;
            current.commit_id = line.substr(kPrefix.size(), id_end - kPrefix.size());
        } else if (!in_commit) {
            if (line.find_first_not_of(" \t") != std::string::npos)
                throw ParseError("commit log: content before the first record delimiter",
                                 pos);
        } else {
            message_lines.push_back(std::move(line));
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    flush();
    return commits;
}

// ---------------------------------------------------------------------------
// Unified diffs

namespace {

/// Parses "@@ -a[,b] +c[,d] @@..." into the four header numbers.
bool parse_hunk_header(const std::string& line, Hunk& hunk) {
    static const std::regex header(
        R"(^@@ -([0-9]+)(?:,([0-9]+))? \+([0-9]+)(?:,([0-9]+))? @@)");
    std::smatch m;
    if (!std::regex_search(line, m, header)) return false;
    try {
        hunk.old_start = std::stoi(m[1].str());
        hunk.old_len = m[2].matched ? std::stoi(m[2].str()) : 1;
        hunk.new_start = std::stoi(m[3].str());
        hunk.new_len = m[4].matched ? std::stoi(m[4].str()) : 1;
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

}  // namespace

UnifiedDiff parse_unified_diff(const std::string& text) {
    UnifiedDiff diff;
    Hunk current;
    int old_rem = 0;
    int new_rem = 0;
    bool in_hunk = false;
    bool after_hunks = false;

    auto hunk_label = [&] {
        return "hunk " + std::to_string(diff.hunks.size() + 1);
    };
    auto finish_hunk = [&] {
        if (!diff.hunks.empty() && current.new_start < diff.hunks.back().new_start)
            throw ParseError("diff: " + hunk_label() + ": hunks out of order (new_start " +
                             std::to_string(current.new_start) + " after " +
                             std::to_string(diff.hunks.back().new_start) + ")");
        diff.hunks.push_back(std::move(current));
        current = Hunk{};
        in_hunk = false;
        after_hunks = true;
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::size_t len = (eol == std::string::npos ? text.size() : eol) - pos;
        std::string line = text.substr(pos, len);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = (eol == std::string::npos) ? text.size() : eol + 1;

        if (line.rfind("@@", 0) == 0) {
            if (in_hunk)
                throw ParseError("diff: " + hunk_label() +
                                 ": body shorter than the header declares");
            Hunk next;
            if (!parse_hunk_header(line, next))
                throw ParseError("diff: malformed hunk header '" + line + "'");
            current = std::move(next);
            old_rem = current.old_len;
            new_rem = current.new_len;
            in_hunk = true;
            if (old_rem == 0 && new_rem == 0) finish_hunk();
            continue;
        }
        if (!line.empty() && line[0] == '\\') continue;  // "\ No newline at end of file"
        if (!in_hunk) {
            if (after_hunks && !line.empty() &&
                (line[0] == ' ' || line[0] == '+' || line[0] == '-'))
                throw ParseError("diff: hunk " + std::to_string(diff.hunks.size()) +
                                 ": body longer than the header declares");
            continue;  // preamble (---/+++/diff/index headers) or trailing blank
        }

        char tag = line.empty() ? ' ' : line[0];
        std::string body = line.empty() ? std::string() : line.substr(1);
        switch (tag) {
            case ' ':
                if (old_rem == 0 || new_rem == 0)
                    throw ParseError("diff: " + hunk_label() +
                                     ": body longer than the header declares");
                --old_rem;
                --new_rem;
                break;
            case '-':
                if (old_rem == 0)
                    throw ParseError("diff: " + hunk_label() +
                                     ": body longer than the header declares");
                --old_rem;
                break;
            case '+':
                if (new_rem == 0)
                    throw ParseError("diff: " + hunk_label() +
                                     ": body longer than the header declares");
                --new_rem;
                break;
            default:
                throw ParseError("diff: " + hunk_label() + ": unexpected line '" + line +
                                 "'");
        }
        current.lines.emplace_back(tag, std::move(body));
        if (old_rem == 0 && new_rem == 0) finish_hunk();
    }
    if (in_hunk)
        throw ParseError("diff: " + hunk_label() +
                         ": body shorter than the header declares");
    return diff;
}

// ---------------------------------------------------------------------------
// Attribution and labeling

std::set<std::string> attribute(const UnifiedDiff& diff,
                                const std::vector<FunctionRecord>& functions) {
    std::set<std::string> touched;
    for (const FunctionRecord& fn : functions) {
        for (const Hunk& hunk : diff.hunks) {
            if (hunk.new_start <= fn.end_line && hunk.new_end() >= fn.begin_line) {
                touched.insert(fn.name);
                break;
            }
        }
    }
    return touched;
}

LabelResult label_functions(const std::vector<ScannedFile>& corpus,
                            const std::vector<CveRecord>& cves) {
    std::map<std::string, std::set<Evidence>> evidence;  // id -> pairs
    std::map<std::string, const ScannedFile*> by_path;
    for (const ScannedFile& file : corpus) {
        by_path.emplace(file.path, &file);
        for (const FunctionRecord& fn : file.functions)
            evidence.try_emplace(file.path + "::" + fn.name);
    }

    LabelResult result;
    for (const CveRecord& cve : cves) {
        for (const CommitRecord& commit : cve.commits) {
            for (const FileDiff& fd : commit.file_diffs) {
                auto file = by_path.find(fd.path);
                if (file == by_path.end()) {
                    result.warnings.push_back("diff path not in corpus: " + fd.path +
                                              " (" + cve.cve_id + ", commit " +
                                              commit.commit_id + ")");
                    continue;
                }
                for (const std::string& name : attribute(fd.diff, file->second->functions))
                    evidence[fd.path + "::" + name].insert(
                        {cve.cve_id, commit.commit_id});
            }
        }
    }

    for (auto& [id, pairs] : evidence) {
        VulnerabilityLabel label;
        label.id = id;
        label.vulnerable = !pairs.empty();
        label.evidence.assign(pairs.begin(), pairs.end());
        result.labels.push_back(std::move(label));
    }
    return result;
}

std::string label_csv(const LabelResult& result) {
    std::string out = "id,vulnerable,evidence_count,cve_ids\n";
    for (const VulnerabilityLabel& label : result.labels) {
        std::vector<std::string> ids;
        for (const Evidence& ev : label.evidence)
            if (std::find(ids.begin(), ids.end(), ev.cve_id) == ids.end())
                ids.push_back(ev.cve_id);
        std::string joined;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) joined += ';';
            joined += ids[i];
        }
        out += csv_field(label.id) + "," + (label.vulnerable ? "1" : "0") + "," +
               std::to_string(label.evidence.size()) + "," + csv_field(joined) + "\n";
    }
    return out;
}

}  // namespace varcg
