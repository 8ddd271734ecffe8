#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "varcg/pc.hpp"

namespace varcg {

// ---------------------------------------------------------------------------
// Variability-aware scanning of C translation units.
//
// The scanner never expands macros and never resolves conditionals: it walks
// the raw token stream, keeps a stack of open conditional-directive groups,
// and attributes what it finds (function definitions, call sites) with the
// presence condition under which the enclosing branches are active.  Function
// detection is deliberately heuristic — `identifier (params) {` at brace
// depth zero — which handles the common shape of C definitions and accepts
// that macro-heavy declarators (K&R definitions, declarator macros) may be
// missed or misattributed.  Brace counting spans ALL branches of a
// conditional, so functions whose braces balance only in some configurations
// can confuse the span tracking; such inputs surface as structural errors.
// ---------------------------------------------------------------------------

/// One input translation unit plus the condition under which the build
/// includes the whole file (from the corpus manifest; pc_true() if absent).
struct SourceFile {
    std::string path;
    std::string content;
    PcRef file_pc;
};

enum class TokenKind { Identifier, Number, Punct, Directive };

/// Comments, string literals and character literals are masked out entirely;
/// preprocessor directives arrive as single Directive tokens carrying the
/// logical line (splices folded, comments stripped) after the '#'.
struct Token {
    TokenKind kind;
    std::string text;
    int line;  // 1-based line where the token starts
};

/// Tokenize; throws SourceError for unterminated comments or literals.
std::vector<Token> lex(const std::string& path, const std::string& content);

enum class DirectiveKind { If, Elif, Else, Endif };

/// One conditional directive with the presence condition of the branch it
/// opens.  For `#elif e` that is !(disjunction of the group's earlier
/// conditions) && e, and for `#else` the bare negated disjunction; an Endif
/// event carries pc_true().
struct DirectiveEvent {
    DirectiveKind kind;
    PcRef branch_pc;
    int line;
};

/// Walk the token stream and emit conditional-directive events, validating
/// nesting (#elif/#else/#endif without #if, #elif after #else, unterminated
/// groups all raise SourceError).  Non-conditional directives are ignored.
std::vector<DirectiveEvent> scan_directives(const std::string& path,
                                            const std::vector<Token>& tokens);

/// Parse a #if/#elif expression.  Inputs inside the boolean grammar parse
/// exactly; anything beyond it (arithmetic, comparisons) degrades to the
/// conjunction of the option names it references, preserving option counts.
/// An out-of-grammar expression referencing no options becomes pc_true().
PcRef parse_directive_expr(std::string_view text);

/// A call site inside a function body.  local_pc is the conjunction of the
/// branch conditions of conditional groups opened strictly inside the body
/// and still open at the call; it deliberately excludes the function's own
/// def_pc and the file condition.
struct CallSite {
    std::string callee;
    int line;
    PcRef local_pc;
};

struct FunctionRecord {
    std::string name;
    std::string file;
    int begin_line = 0;  // first line of the declaration run
    int end_line = 0;    // line of the closing brace
    PcRef def_pc;        // conjunction of branches enclosing the definition
    int size_loc = 0;    // end_line - begin_line + 1
    int internal_ifdefs = 0;               // groups opened strictly inside the body
    std::set<std::string> internal_options;  // options those groups reference
    std::vector<CallSite> calls;
};

struct ScanOptions {
    /// Extra identifiers to ignore at call sites (besides C keywords).
    std::set<std::string> extra_stoplist;
};

/// Extract all function definitions (with spans, presence conditions,
/// internal-variability counts and call sites) in source order.
std::vector<FunctionRecord> extract_functions(const SourceFile& file,
                                              const ScanOptions& options = {});

/// True for C keywords and the built-in stoplist entries (GNU extension
/// keywords and vararg macros) that never denote a callee.
bool is_stoplisted(const std::string& identifier);

}  // namespace varcg
