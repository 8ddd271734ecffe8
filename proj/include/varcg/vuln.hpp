#pragma once

// Per-function vulnerability labels mined from offline inputs: a CVE
// manifest (JSON), an exported commit log, and unified diffs whose changed
// line ranges are attributed to function spans.  Everything is hermetic —
// no network, no git; the inputs are plain files.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "varcg/graph.hpp"
#include "varcg/scan.hpp"

namespace varcg {

/// One hunk of a unified diff.  `lines` holds the body in order; tags are
/// ' ' (context), '+' (add), '-' (del).  Counts always satisfy
/// context+del == old_len and context+add == new_len.
struct Hunk {
    int old_start = 0;
    int old_len = 0;
    int new_start = 0;
    int new_len = 0;
    std::vector<std::pair<char, std::string>> lines;

    /// Last line of the effective new-file range.  Pure deletions
    /// (new_len == 0) keep a single insertion-point line.
    int new_end() const { return new_start + (new_len > 1 ? new_len : 1) - 1; }
};

struct UnifiedDiff {
    std::vector<Hunk> hunks;  // ordered by new_start
};

struct FileDiff {
    std::string path;  // corpus-relative
    UnifiedDiff diff;
};

struct CommitRecord {
    std::string commit_id;
    std::string message;
    std::vector<FileDiff> file_diffs;
    std::vector<std::string> cve_ids;  // ids mentioned in the message
};

struct CveRecord {
    std::string cve_id;
    std::vector<CommitRecord> commits;
};

struct Evidence {
    std::string cve_id;
    std::string commit_id;

    friend bool operator==(const Evidence&, const Evidence&) = default;
    friend auto operator<=>(const Evidence&, const Evidence&) = default;
};

struct VulnerabilityLabel {
    std::string id;  // "file::name"
    bool vulnerable = false;
    std::vector<Evidence> evidence;  // sorted, deduplicated
};

struct LabelResult {
    std::vector<VulnerabilityLabel> labels;  // one per function, sorted by id
    std::vector<std::string> warnings;
};

/// True when `text` is exactly one CVE identifier: CVE-<4 digits>-<4+ digits>
/// (case sensitive).
bool is_cve_id(const std::string& text);

/// All CVE identifiers contained in free text, deduplicated, in order of
/// first appearance.
std::vector<std::string> find_cve_ids(const std::string& text);

/// Parse a CVE manifest:
///   [ { "cve_id": text,
///       "commits": [ { "commit_id": text, "message": text,
///                      "files": [ { "path": text, "diff": text } ] } ] } ]
/// Diff texts are parsed as unified diffs.  Throws ParseError naming the
/// JSON path of the offending element for schema violations, malformed CVE
/// ids, and duplicate CVE ids.
std::vector<CveRecord> parse_cve_manifest(const std::string& text);

/// Parse an exported commit log.  Records are introduced by a delimiter
/// line "\x00COMMIT <id>\x00"; all following lines up to the next delimiter
/// form the message.  Returns only commits whose message mentions at least
/// one CVE id, with the mentioned ids recorded.  Throws ParseError (with
/// byte offset) on malformed delimiters or content before the first one.
std::vector<CommitRecord> scan_commit_log(const std::string& export_text);

/// Parse a unified diff.  Leading non-hunk lines (---/+++/diff headers) are
/// skipped; hunk headers are "@@ -a[,b] +c[,d] @@" with omitted lengths
/// defaulting to 1.  Throws ParseError naming the 1-based hunk index when a
/// body disagrees with its header counts, and rejects hunks out of
/// new_start order.
UnifiedDiff parse_unified_diff(const std::string& text);

/// Names of the functions whose spans [begin_line, end_line] intersect some
/// hunk's effective new-file range.  Order-independent in both arguments.
std::set<std::string> attribute(const UnifiedDiff& diff,
                                const std::vector<FunctionRecord>& functions);

/// Label every corpus function.  A function is vulnerable iff at least one
/// commit of at least one CVE touches it; each touching (cve_id, commit_id)
/// pair is accumulated as evidence.  Diff paths absent from the corpus are
/// reported as warnings and skipped.
LabelResult label_functions(const std::vector<ScannedFile>& corpus,
                            const std::vector<CveRecord>& cves);

/// CSV rendering: header "id,vulnerable,evidence_count,cve_ids"; vulnerable
/// is 1/0; cve_ids are the distinct ids semicolon-joined in sorted order.
std::string label_csv(const LabelResult& result);

}  // namespace varcg
