#include "varcg/pc.hpp"

#include <algorithm>
#include <cctype>

#include "varcg/errors.hpp"

namespace varcg {

namespace {

PcRef make_node(PcKind kind, std::string atom, std::vector<PcRef> ops) {
    return std::make_shared<const Pc>(Pc::MakeTag{}, kind, std::move(atom), std::move(ops));
}

bool is_ident_start(char c) {
    return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

}  // namespace

PcRef pc_true() {
    static const PcRef t = make_node(PcKind::True, {}, {});
    return t;
}

PcRef pc_false() {
    static const PcRef f = make_node(PcKind::False, {}, {});
    return f;
}

bool is_option_name(std::string_view name) {
    if (name.empty() || !is_ident_start(name[0])) return false;
    return std::all_of(name.begin(), name.end(), is_ident_char);
}

PcRef pc_atom(std::string_view name) {
    if (!is_option_name(name))
        throw ParseError("invalid option name '" + std::string(name) + "'");
    return make_node(PcKind::Atom, std::string(name), {});
}

PcRef pc_not(const PcRef& a) {
    switch (a->kind()) {
        case PcKind::True:  return pc_false();
        case PcKind::False: return pc_true();
        case PcKind::Not:   return a->operand();
        default:            return make_node(PcKind::Not, {}, {a});
    }
}

namespace {

// Shared machinery for pc_and / pc_or.  `absorbing` is the constant that
// short-circuits the whole expression, `neutral` the one that is dropped.
PcRef combine(PcKind kind, PcKind absorbing, PcKind neutral,
              const PcRef& a, const PcRef& b) {
    if (a->kind() == absorbing || b->kind() == absorbing)
        return absorbing == PcKind::False ? pc_false() : pc_true();

    std::vector<PcRef> ops;
    auto append = [&](const PcRef& x) {
        if (x->kind() == neutral) return;
        if (x->kind() == kind) {
            for (const PcRef& child : x->operands()) ops.push_back(child);
        } else {
            ops.push_back(x);
        }
    };
    append(a);
    append(b);

    // Adjacent structural duplicates collapse; non-adjacent ones are kept
    // (no sorting — operand order is meaningful for rendering stability).
    std::vector<PcRef> dedup;
    for (const PcRef& op : ops) {
        if (!dedup.empty() && pc_equal(dedup.back(), op)) continue;
        dedup.push_back(op);
    }

    if (dedup.empty()) return neutral == PcKind::True ? pc_true() : pc_false();
    if (dedup.size() == 1) return dedup.front();
    return make_node(kind, {}, std::move(dedup));
}

}  // namespace

PcRef pc_and(const PcRef& a, const PcRef& b) {
    return combine(PcKind::And, PcKind::False, PcKind::True, a, b);
}

PcRef pc_or(const PcRef& a, const PcRef& b) {
    return combine(PcKind::Or, PcKind::True, PcKind::False, a, b);
}

bool pc_equal(const PcRef& a, const PcRef& b) {
    if (a.get() == b.get()) return true;
    if (a->kind() != b->kind()) return false;
    switch (a->kind()) {
        case PcKind::True:
        case PcKind::False:
            return true;
        case PcKind::Atom:
            return a->atom() == b->atom();
        case PcKind::Not:
            return pc_equal(a->operand(), b->operand());
        case PcKind::And:
        case PcKind::Or: {
            const auto& xs = a->operands();
            const auto& ys = b->operands();
            if (xs.size() != ys.size()) return false;
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (!pc_equal(xs[i], ys[i])) return false;
            return true;
        }
    }
    return false;
}

bool evaluate(const PcRef& pc, const ConfigAssignment& config) {
    switch (pc->kind()) {
        case PcKind::True:  return true;
        case PcKind::False: return false;
        case PcKind::Atom:  return config.value_of(pc->atom());
        case PcKind::Not:   return !evaluate(pc->operand(), config);
        case PcKind::And:
            for (const PcRef& op : pc->operands())
                if (!evaluate(op, config)) return false;
            return true;
        case PcKind::Or:
            for (const PcRef& op : pc->operands())
                if (evaluate(op, config)) return true;
            return false;
    }
    return false;
}

namespace {

void collect_options(const PcRef& pc, std::set<std::string>& out) {
    switch (pc->kind()) {
        case PcKind::Atom:
            out.insert(pc->atom());
            break;
        case PcKind::Not:
            collect_options(pc->operand(), out);
            break;
        case PcKind::And:
        case PcKind::Or:
            for (const PcRef& op : pc->operands()) collect_options(op, out);
            break;
        default:
            break;
    }
}

// Evaluation against a bitmask over an option-index map; avoids building a
// ConfigAssignment per enumerated configuration.
bool eval_mask(const PcRef& pc, const std::map<std::string, int>& index,
               std::uint32_t mask) {
    switch (pc->kind()) {
        case PcKind::True:  return true;
        case PcKind::False: return false;
        case PcKind::Atom:  return (mask >> index.at(pc->atom())) & 1u;
        case PcKind::Not:   return !eval_mask(pc->operand(), index, mask);
        case PcKind::And:
            for (const PcRef& op : pc->operands())
                if (!eval_mask(op, index, mask)) return false;
            return true;
        case PcKind::Or:
            for (const PcRef& op : pc->operands())
                if (eval_mask(op, index, mask)) return true;
            return false;
    }
    return false;
}

}  // namespace

std::set<std::string> options_of(const PcRef& pc) {
    std::set<std::string> out;
    collect_options(pc, out);
    return out;
}

std::size_t option_count(const PcRef& pc) {
    return options_of(pc).size();
}

bool is_satisfiable(const PcRef& pc) {
    std::set<std::string> opts = options_of(pc);
    if (opts.size() > kSatOptionLimit)
        throw OptionLimitError("satisfiability check over " + std::to_string(opts.size()) +
                               " options exceeds the limit of " +
                               std::to_string(kSatOptionLimit));
    std::map<std::string, int> index;
    int i = 0;
    for (const std::string& name : opts) index[name] = i++;
    const std::uint64_t combos = 1ull << opts.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask)
        if (eval_mask(pc, index, static_cast<std::uint32_t>(mask))) return true;
    return false;
}

namespace {

// Rendering uses the usual C precedence (! over && over ||) and adds
// parentheses only where required, so And operands that are Or get wrapped
// and everything else stays bare.
void render_into(const PcRef& pc, std::string& out);

void render_wrapped(const PcRef& pc, std::string& out, bool need_parens) {
    if (need_parens) out += '(';
    render_into(pc, out);
    if (need_parens) out += ')';
}

void render_into(const PcRef& pc, std::string& out) {
    switch (pc->kind()) {
        case PcKind::True:
            out += '1';
            break;
        case PcKind::False:
            out += '0';
            break;
        case PcKind::Atom:
            out += "defined(";
            out += pc->atom();
            out += ')';
            break;
        case PcKind::Not: {
            const PcRef& inner = pc->operand();
            out += '!';
            render_wrapped(inner, out,
                           inner->kind() == PcKind::And || inner->kind() == PcKind::Or);
            break;
        }
        case PcKind::And: {
            bool first = true;
            for (const PcRef& op : pc->operands()) {
                if (!first) out += " && ";
                first = false;
                render_wrapped(op, out, op->kind() == PcKind::Or);
            }
            break;
        }
        case PcKind::Or: {
            bool first = true;
            for (const PcRef& op : pc->operands()) {
                if (!first) out += " || ";
                first = false;
                render_into(op, out);
            }
            break;
        }
    }
}

// Recursive-descent parser for the rendered grammar:
//   or   := and ('||' and)*
//   and  := unary ('&&' unary)*
//   unary:= '!' unary | '(' or ')' | 'defined' ['('] NAME [')'] | NAME | '1' | '0'
class PcParser {
public:
    explicit PcParser(std::string_view text) : text_(text) {}

    PcRef parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty presence condition", 0);
        PcRef result = parse_or();
        skip_ws();
        if (pos_ < text_.size())
            throw ParseError("unexpected trailing input in presence condition", pos_);
        return result;
    }

private:
    PcRef parse_or() {
        PcRef lhs = parse_and();
        while (eat("||")) lhs = pc_or(lhs, parse_and());
        return lhs;
    }

    PcRef parse_and() {
        PcRef lhs = parse_unary();
        while (eat("&&")) lhs = pc_and(lhs, parse_unary());
        return lhs;
    }

    PcRef parse_unary() {
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of presence condition", pos_);
        char c = text_[pos_];
        if (c == '!') {
            ++pos_;
            return pc_not(parse_unary());
        }
        if (c == '(') {
            ++pos_;
            PcRef inner = parse_or();
            expect(')');
            return inner;
        }
        if (c == '1' || c == '0') {
            // Only the bare constants 1 and 0 are in the grammar; a longer
            // pp-number (arithmetic) is out of scope.
            if (pos_ + 1 < text_.size() && is_ident_char(text_[pos_ + 1]))
                throw ParseError("numeric literal in presence condition", pos_);
            ++pos_;
            return c == '1' ? pc_true() : pc_false();
        }
        if (is_ident_start(c)) {
            std::string_view name = read_ident();
            if (name == "defined") return parse_defined();
            return pc_atom(name);
        }
        throw ParseError(std::string("unexpected character '") + c +
                         "' in presence condition", pos_);
    }

    PcRef parse_defined() {
        skip_ws();
        bool parens = pos_ < text_.size() && text_[pos_] == '(';
        if (parens) ++pos_;
        skip_ws();
        if (pos_ >= text_.size() || !is_ident_start(text_[pos_]))
            throw ParseError("expected option name after 'defined'", pos_);
        PcRef atom = pc_atom(read_ident());
        if (parens) expect(')');
        return atom;
    }

    std::string_view read_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    bool eat(std::string_view token) {
        skip_ws();
        if (text_.substr(pos_).starts_with(token)) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string render(const PcRef& pc) {
    std::string out;
    render_into(pc, out);
    return out;
}

PcRef parse_pc(std::string_view text) {
    return PcParser(text).parse();
}

}  // namespace varcg
