#include "varcg/scan.hpp"

#include <optional>
#include <unordered_set>
#include <utility>

#include "varcg/errors.hpp"

namespace varcg {

namespace {

bool is_ident_start(char c) {
    return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// -----------------------------------------------------------------------
// Lexer
// -----------------------------------------------------------------------

class Lexer {
public:
    Lexer(const std::string& path, const std::string& content)
        : path_(path), src_(content) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                at_line_start_ = true;
                ++pos_;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
                ++pos_;
                continue;
            }
            if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
                pos_ += 2;  // line splice
                ++line_;
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                skip_line_comment();
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                skip_block_comment();
                continue;  // comments never clear at_line_start
            }
            if (c == '"') {
                skip_string('"', "string literal");
                at_line_start_ = false;
                continue;
            }
            if (c == '\'') {
                skip_string('\'', "character literal");
                at_line_start_ = false;
                continue;
            }
            if (c == '#' && at_line_start_) {
                tokens.push_back(read_directive());
                continue;  // read_directive consumes the newline handling
            }
            at_line_start_ = false;
            if (is_ident_start(c)) {
                tokens.push_back(read_identifier());
                continue;
            }
            if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
                tokens.push_back(read_pp_number());
                continue;
            }
            tokens.push_back({TokenKind::Punct, std::string(1, c), line_});
            ++pos_;
        }
        return tokens;
    }

private:
    char peek(std::size_t ahead) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void skip_line_comment() {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
    }

    void skip_block_comment() {
        int start = line_;
        pos_ += 2;
        while (pos_ < src_.size()) {
            if (src_[pos_] == '\n') ++line_;
            if (src_[pos_] == '*' && peek(1) == '/') {
                pos_ += 2;
                return;
            }
            ++pos_;
        }
        throw SourceError(path_, start, "unterminated comment");
    }

    void skip_string(char quote, const char* what) {
        int start = line_;
        ++pos_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\\' && pos_ + 1 < src_.size()) {
                if (src_[pos_ + 1] == '\n') ++line_;
                pos_ += 2;
                continue;
            }
            if (c == '\n') throw SourceError(path_, start, std::string("unterminated ") + what);
            ++pos_;
            if (c == quote) return;
        }
        throw SourceError(path_, start, std::string("unterminated ") + what);
    }

    Token read_identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        return {TokenKind::Identifier, src_.substr(start, pos_ - start), line_};
    }

    // pp-number: digit (or .digit) followed by identifier chars, dots, and
    // sign characters after an exponent marker.
    Token read_pp_number() {
        std::size_t start = pos_;
        ++pos_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (is_ident_char(c) || c == '.') {
                ++pos_;
                continue;
            }
            if ((c == '+' || c == '-') && pos_ > start) {
                char prev = src_[pos_ - 1];
                if (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') {
                    ++pos_;
                    continue;
                }
            }
            break;
        }
        return {TokenKind::Number, src_.substr(start, pos_ - start), line_};
    }

    // Collect the logical directive line after '#': splices folded to a
    // space, comments stripped, strings copied verbatim.
    Token read_directive() {
        int start = line_;
        ++pos_;  // consume '#'
        std::string text;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') break;
            if (c == '\\' && peek(1) == '\n') {
                pos_ += 2;
                ++line_;
                text += ' ';
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                skip_line_comment();
                break;
            }
            if (c == '/' && peek(1) == '*') {
                skip_block_comment();
                text += ' ';
                continue;
            }
            if (c == '"' || c == '\'') {
                std::size_t from = pos_;
                skip_string(c, c == '"' ? "string literal" : "character literal");
                text.append(src_, from, pos_ - from);
                continue;
            }
            text += c;
            ++pos_;
        }
        // trim
        std::size_t b = text.find_first_not_of(" \t");
        std::size_t e = text.find_last_not_of(" \t");
        text = b == std::string::npos ? std::string() : text.substr(b, e - b + 1);
        return {TokenKind::Directive, std::move(text), start};
    }

    const std::string& path_;
    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    bool at_line_start_ = true;
};

// -----------------------------------------------------------------------
// Directive classification and group tracking
// -----------------------------------------------------------------------

struct Classified {
    DirectiveKind kind;
    PcRef raw_cond;  // the condition as written (If/Elif only)
};

std::optional<Classified> classify_directive(const std::string& path, const Token& tok) {
    const std::string& text = tok.text;
    std::size_t i = 0;
    while (i < text.size() && is_ident_char(text[i])) ++i;
    std::string word = text.substr(0, i);
    std::string rest = text.substr(i);

    auto require_name = [&](const char* directive) {
        std::size_t b = rest.find_first_not_of(" \t");
        if (b == std::string::npos || !is_ident_start(rest[b]))
            throw SourceError(path, tok.line,
                              std::string("#") + directive + " without an option name");
        std::size_t e = b;
        while (e < rest.size() && is_ident_char(rest[e])) ++e;
        return rest.substr(b, e - b);
    };

    if (word == "if")
        return Classified{DirectiveKind::If, parse_directive_expr(rest)};
    if (word == "ifdef")
        return Classified{DirectiveKind::If, pc_atom(require_name("ifdef"))};
    if (word == "ifndef")
        return Classified{DirectiveKind::If, pc_not(pc_atom(require_name("ifndef")))};
    if (word == "elif")
        return Classified{DirectiveKind::Elif, parse_directive_expr(rest)};
    if (word == "else")
        return Classified{DirectiveKind::Else, pc_true()};
    if (word == "endif")
        return Classified{DirectiveKind::Endif, pc_true()};
    return std::nullopt;  // include/define/pragma/... are not conditionals
}

// Stack of open conditional groups.  branch_pc of the top entries, ANDed
// together, is the presence condition of the current textual position
// (relative to the file condition).
class DirectiveTracker {
public:
    explicit DirectiveTracker(const std::string& path) : path_(path) {}

    struct Group {
        PcRef prior_or;    // disjunction of this group's earlier raw conditions
        PcRef branch_pc;   // pc of the branch currently open
        bool saw_else = false;
        int open_line = 0;
    };

    DirectiveEvent feed(const Classified& c, int line) {
        switch (c.kind) {
            case DirectiveKind::If: {
                stack_.push_back({c.raw_cond, c.raw_cond, false, line});
                return {DirectiveKind::If, c.raw_cond, line};
            }
            case DirectiveKind::Elif: {
                Group& g = top(line, "#elif");
                if (g.saw_else) throw SourceError(path_, line, "#elif after #else");
                PcRef branch = pc_and(pc_not(g.prior_or), c.raw_cond);
                g.prior_or = pc_or(g.prior_or, c.raw_cond);
                g.branch_pc = branch;
                return {DirectiveKind::Elif, branch, line};
            }
            case DirectiveKind::Else: {
                Group& g = top(line, "#else");
                if (g.saw_else) throw SourceError(path_, line, "#else after #else");
                g.saw_else = true;
                g.branch_pc = pc_not(g.prior_or);
                return {DirectiveKind::Else, g.branch_pc, line};
            }
            case DirectiveKind::Endif: {
                top(line, "#endif");
                stack_.pop_back();
                return {DirectiveKind::Endif, pc_true(), line};
            }
        }
        throw SourceError(path_, line, "unreachable directive kind");
    }

    void check_closed() const {
        if (!stack_.empty())
            throw SourceError(path_, stack_.back().open_line,
                              "unterminated conditional directive");
    }

    const std::vector<Group>& stack() const { return stack_; }

    PcRef context_pc() const {
        PcRef pc = pc_true();
        for (const Group& g : stack_) pc = pc_and(pc, g.branch_pc);
        return pc;
    }

private:
    Group& top(int line, const char* what) {
        if (stack_.empty())
            throw SourceError(path_, line, std::string(what) + " without matching #if");
        return stack_.back();
    }

    const std::string& path_;
    std::vector<Group> stack_;
};

const std::unordered_set<std::string>& keyword_set() {
    static const std::unordered_set<std::string> kw = {
        // C keywords
        "auto", "break", "case", "char", "const", "continue", "default", "do",
        "double", "else", "enum", "extern", "float", "for", "goto", "if",
        "inline", "int", "long", "register", "restrict", "return", "short",
        "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
        "unsigned", "void", "volatile", "while", "_Alignas", "_Alignof",
        "_Atomic", "_Bool", "_Complex", "_Generic", "_Noreturn",
        "_Static_assert", "_Thread_local",
        // common extension keywords and vararg machinery that look like calls
        "__attribute__", "__declspec", "__asm__", "asm", "typeof",
        "__typeof__", "__alignof__", "alignof", "offsetof", "va_arg",
        "va_start", "va_end", "va_copy", "defined",
    };
    return kw;
}

}  // namespace

bool is_stoplisted(const std::string& identifier) {
    return keyword_set().count(identifier) != 0;
}

std::vector<Token> lex(const std::string& path, const std::string& content) {
    return Lexer(path, content).run();
}

PcRef parse_directive_expr(std::string_view text) {
    try {
        return parse_pc(text);
    } catch (const ParseError&) {
        // Out-of-grammar expression (arithmetic, comparisons, macros).
        // Approximate with the conjunction of the options it references so
        // option counts survive; the truth value is an over-approximation.
        PcRef pc = pc_true();
        std::vector<std::string> seen;
        std::size_t i = 0;
        while (i < text.size()) {
            if (is_ident_start(text[i])) {
                std::size_t b = i;
                while (i < text.size() && is_ident_char(text[i])) ++i;
                std::string name(text.substr(b, i - b));
                if (name == "defined") continue;
                bool dup = false;
                for (const auto& s : seen) dup = dup || s == name;
                if (!dup) {
                    seen.push_back(name);
                    pc = pc_and(pc, pc_atom(name));
                }
            } else {
                ++i;
            }
        }
        return pc;
    }
}

std::vector<DirectiveEvent> scan_directives(const std::string& path,
                                            const std::vector<Token>& tokens) {
    DirectiveTracker tracker(path);
    std::vector<DirectiveEvent> events;
    for (const Token& tok : tokens) {
        if (tok.kind != TokenKind::Directive) continue;
        if (auto c = classify_directive(path, tok)) events.push_back(tracker.feed(*c, tok.line));
    }
    tracker.check_closed();
    return events;
}

namespace {

// -----------------------------------------------------------------------
// Function extraction state machine
// -----------------------------------------------------------------------

class Extractor {
public:
    Extractor(const SourceFile& file, const ScanOptions& options)
        : file_(file), options_(options), tracker_(file.path) {}

    std::vector<FunctionRecord> run() {
        for (const Token& tok : lex(file_.path, file_.content)) {
            if (tok.kind == TokenKind::Directive) {
                on_directive(tok);
                continue;
            }
            switch (phase_) {
                case Phase::Top:         on_top(tok); break;
                case Phase::Params:      on_params(tok); break;
                case Phase::AfterParams: on_after_params(tok); break;
                case Phase::Body:        on_body(tok); break;
            }
        }
        if (phase_ == Phase::Body)
            throw SourceError(file_.path, current_.begin_line,
                              "unbalanced braces at end of file in function '" +
                                  current_.name + "'");
        if (anon_depth_ > 0)
            throw SourceError(file_.path, anon_open_line_,
                              "unbalanced braces at end of file");
        tracker_.check_closed();
        return std::move(out_);
    }

private:
    enum class Phase { Top, Params, AfterParams, Body };

    void on_directive(const Token& tok) {
        auto classified = classify_directive(file_.path, tok);
        if (!classified) return;
        DirectiveEvent ev = tracker_.feed(*classified, tok.line);
        switch (ev.kind) {
            case DirectiveKind::If:
                in_body_group_.push_back(phase_ == Phase::Body);
                if (in_body_group_.back()) {
                    ++current_.internal_ifdefs;
                    note_internal_options(classified->raw_cond);
                }
                break;
            case DirectiveKind::Elif:
                if (phase_ == Phase::Body && !in_body_group_.empty() && in_body_group_.back())
                    note_internal_options(classified->raw_cond);
                break;
            case DirectiveKind::Else:
                break;
            case DirectiveKind::Endif:
                if (!in_body_group_.empty()) in_body_group_.pop_back();
                break;
        }
    }

    void note_internal_options(const PcRef& cond) {
        for (const auto& name : options_of(cond)) current_.internal_options.insert(name);
    }

    // Presence condition of conditional groups opened strictly inside the
    // current body and still open.
    PcRef local_pc() const {
        PcRef pc = pc_true();
        const auto& stack = tracker_.stack();
        for (std::size_t i = 0; i < stack.size() && i < in_body_group_.size(); ++i)
            if (in_body_group_[i]) pc = pc_and(pc, stack[i].branch_pc);
        return pc;
    }

    void on_top(const Token& tok) {
        if (anon_depth_ > 0) {
            if (tok.kind == TokenKind::Punct && tok.text == "{") ++anon_depth_;
            if (tok.kind == TokenKind::Punct && tok.text == "}") {
                if (--anon_depth_ == 0) reset_run();
            }
            return;
        }
        if (paren_skip_depth_ > 0) {
            if (tok.kind == TokenKind::Punct && tok.text == "(") ++paren_skip_depth_;
            if (tok.kind == TokenKind::Punct && tok.text == ")") --paren_skip_depth_;
            return;
        }

        if (run_begin_line_ < 0) run_begin_line_ = tok.line;

        if (tok.kind == TokenKind::Identifier) {
            last_ident_ = tok;
            return;
        }
        if (tok.kind == TokenKind::Punct && tok.text == "(") {
            if (last_ident_ && !is_stoplisted(last_ident_->text) &&
                !options_.extra_stoplist.count(last_ident_->text)) {
                pending_name_ = last_ident_->text;
                pending_run_line_ = run_begin_line_;
                phase_ = Phase::Params;
                paren_depth_ = 1;
            } else {
                paren_skip_depth_ = 1;
            }
            last_ident_.reset();
            return;
        }
        if (tok.kind == TokenKind::Punct && tok.text == ";") {
            reset_run();
            return;
        }
        if (tok.kind == TokenKind::Punct && tok.text == "{") {
            anon_depth_ = 1;
            anon_open_line_ = tok.line;
            last_ident_.reset();
            return;
        }
        if (tok.kind == TokenKind::Punct && tok.text == "}")
            throw SourceError(file_.path, tok.line, "unmatched '}' at top level");
        last_ident_.reset();
    }

    void on_params(const Token& tok) {
        if (tok.kind != TokenKind::Punct) return;
        if (tok.text == "(") ++paren_depth_;
        if (tok.text == ")" && --paren_depth_ == 0) phase_ = Phase::AfterParams;
        if (paren_depth_ < 0) paren_depth_ = 0;  // branch-spanning parens
    }

    void on_after_params(const Token& tok) {
        if (tok.kind == TokenKind::Punct && tok.text == "{") {
            begin_function(tok.line);
            return;
        }
        if (tok.kind == TokenKind::Punct && tok.text == ";") {
            phase_ = Phase::Top;
            reset_run();
            return;
        }
        // Not a definition after all (declarator suffix, initializer, ...):
        // fall back to top-level handling of this very token.
        phase_ = Phase::Top;
        on_top(tok);
    }

    void begin_function(int brace_line) {
        current_ = FunctionRecord{};
        current_.name = pending_name_;
        current_.file = file_.path;
        current_.begin_line = pending_run_line_;
        current_.def_pc = tracker_.context_pc();
        (void)brace_line;
        brace_depth_ = 1;
        phase_ = Phase::Body;
        last_ident_.reset();
    }

    void on_body(const Token& tok) {
        if (tok.kind == TokenKind::Identifier) {
            last_ident_ = tok;
            return;
        }
        if (tok.kind == TokenKind::Punct && tok.text == "(") {
            if (last_ident_ && !is_stoplisted(last_ident_->text) &&
                !options_.extra_stoplist.count(last_ident_->text))
                current_.calls.push_back({last_ident_->text, last_ident_->line, local_pc()});
            last_ident_.reset();
            return;
        }
        if (tok.kind == TokenKind::Punct && tok.text == "{") {
            ++brace_depth_;
            last_ident_.reset();
            return;
        }
        if (tok.kind == TokenKind::Punct && tok.text == "}") {
            last_ident_.reset();
            if (--brace_depth_ == 0) end_function(tok.line);
            return;
        }
        last_ident_.reset();
    }

    void end_function(int close_line) {
        current_.end_line = close_line;
        current_.size_loc = close_line - current_.begin_line + 1;
        out_.push_back(std::move(current_));
        current_ = FunctionRecord{};
        // Groups opened in this body but left open belong to no body anymore.
        std::fill(in_body_group_.begin(), in_body_group_.end(), false);
        phase_ = Phase::Top;
        reset_run();
    }

    void reset_run() {
        run_begin_line_ = -1;
        last_ident_.reset();
    }

    const SourceFile& file_;
    const ScanOptions& options_;
    DirectiveTracker tracker_;
    std::vector<bool> in_body_group_;  // parallel to tracker_.stack()

    Phase phase_ = Phase::Top;
    int paren_depth_ = 0;       // Params phase
    int paren_skip_depth_ = 0;  // non-candidate parens at top level
    int anon_depth_ = 0;        // non-function braces at top level
    int anon_open_line_ = 0;
    int brace_depth_ = 0;       // Body phase
    int run_begin_line_ = -1;
    std::optional<Token> last_ident_;
    std::string pending_name_;
    int pending_run_line_ = 0;
    FunctionRecord current_;
    std::vector<FunctionRecord> out_;
};

}  // namespace

std::vector<FunctionRecord> extract_functions(const SourceFile& file,
                                              const ScanOptions& options) {
    return Extractor(file, options).run();
}

}  // namespace varcg
