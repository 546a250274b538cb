#include "wfsmr/program.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace wfsmr {

bool Atom::is_ground() const {
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

bool Rule::is_definite() const {
    return std::none_of(body.begin(), body.end(), [](const Literal& l) { return l.negated; });
}

std::vector<const Atom*> Rule::positive() const {
    std::vector<const Atom*> out;
    for (const auto& lit : body)
        if (!lit.negated) out.push_back(&lit.atom);
    return out;
}

std::vector<const Atom*> Rule::negative() const {
    std::vector<const Atom*> out;
    for (const auto& lit : body)
        if (lit.negated) out.push_back(&lit.atom);
    return out;
}

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

ArityError::ArityError(std::string predicate, std::size_t expected, std::size_t found)
    : std::runtime_error("predicate '" + predicate + "' used with arity " + std::to_string(found) +
                         ", previously " + std::to_string(expected)),
      predicate_(std::move(predicate)) {}

namespace {

std::string describe(const std::vector<SafetyViolation>& violations) {
    std::ostringstream os;
    os << "unsafe program:";
    for (const auto& v : violations) {
        os << "\n  rule " << v.rule_index + 1 << " '" << v.rule << "': variable";
        if (v.variables.size() > 1) os << 's';
        for (std::size_t i = 0; i < v.variables.size(); ++i)
            os << (i ? ", " : " ") << v.variables[i];
        os << " not bound by a positive subgoal";
    }
    return os.str();
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    Rule clause() {
        Rule rule;
        rule.head = atom();
        skip_space();
        if (peek_arrow()) {
            pos_ += 2;
            column_ += 2;
            do {
                rule.body.push_back(literal());
                skip_space();
            } while (accept(','));
        }
        expect('.');
        return rule;
    }

    Atom ground_atom() {
        const auto line = line_, column = column_;
        Atom a = atom();
        if (!a.is_ground()) throw ParseError("fact '" + to_string(a) + "' is not ground", line, column);
        skip_space();
        if (peek_arrow()) fail("rules are not allowed in a facts file");
        expect('.');
        return a;
    }

private:
    Literal literal() {
        skip_space();
        Literal lit;
        if (text_.substr(pos_, 3) == "not" && pos_ + 3 < text_.size() &&
            std::isspace(static_cast<unsigned char>(text_[pos_ + 3]))) {
            pos_ += 3;
            column_ += 3;
            lit.negated = true;
        }
        lit.atom = atom();
        return lit;
    }

    Atom atom() {
        skip_space();
        Atom a;
        if (pos_ >= text_.size() || !std::islower(static_cast<unsigned char>(text_[pos_])))
            fail("expected predicate name");
        a.predicate = identifier();
        skip_space();
        if (accept('(')) {
            skip_space();
            if (!accept(')')) {
                do {
                    a.args.push_back(term());
                    skip_space();
                } while (accept(','));
                expect(')');
            }
        }
        return a;
    }

    Term term() {
        skip_space();
        if (pos_ >= text_.size()) fail("expected term");
        const char c = text_[pos_];
        if (std::isupper(static_cast<unsigned char>(c))) return Term::variable(identifier());
        if (std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)))
            return Term::constant(identifier());
        fail(std::string("unexpected character '") + c + "' in term");
    }

    std::string identifier() {
        const auto start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
            ++pos_;
            ++column_;
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    bool peek_arrow() const {
        auto two = text_.substr(pos_, 2);
        return two == ":-" || two == "<-";
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            ++column_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of input");
            fail(std::string("expected '") + c + "', found '" + text_[pos_] + "'");
        }
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++pos_;
                ++line_;
                column_ = 1;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                ++column_;
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, column_); }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

void note_arity(Signatures& signatures, const std::string& predicate, std::size_t arity) {
    auto [it, inserted] = signatures.emplace(predicate, arity);
    if (!inserted && it->second != arity) throw ArityError(predicate, it->second, arity);
}

void collect_variables(const Atom& atom, std::vector<std::string>& out) {
    for (const auto& t : atom.args)
        if (t.is_variable() && std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
}

}  // namespace

SafetyError::SafetyError(std::vector<SafetyViolation> violations)
    : std::runtime_error(describe(violations)), violations_(std::move(violations)) {}

SafetyCheck check_safety(const Rule& rule) {
    std::vector<std::string> bound;
    for (const auto* atom : rule.positive()) collect_variables(*atom, bound);

    std::vector<std::string> used;
    collect_variables(rule.head, used);
    for (const auto* atom : rule.negative()) collect_variables(*atom, used);

    SafetyCheck check;
    for (auto& v : used)
        if (std::find(bound.begin(), bound.end(), v) == bound.end()) check.unsafe.push_back(std::move(v));
    return check;
}

void validate(Program& program) {
    program.signatures.clear();
    program.edb.clear();

    std::set<std::string> derived;
    std::set<std::string> in_bodies;
    std::vector<SafetyViolation> violations;
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        const auto& rule = program.rules[i];
        note_arity(program.signatures, rule.head.predicate, rule.head.arity());
        for (const auto& lit : rule.body) {
            note_arity(program.signatures, lit.atom.predicate, lit.atom.arity());
            in_bodies.insert(lit.atom.predicate);
        }
        if (rule.is_fact())
            program.edb.insert(rule.head.predicate);
        else
            derived.insert(rule.head.predicate);

        auto check = check_safety(rule);
        if (!check.ok()) violations.push_back({i, to_string(rule), std::move(check.unsafe)});
    }
    for (const auto& p : in_bodies)
        if (!derived.contains(p)) program.edb.insert(p);

    if (!violations.empty()) throw SafetyError(std::move(violations));
}

Program parse_program(std::string_view text) {
    Parser parser(text);
    Program program;
    while (!parser.at_end()) program.rules.push_back(parser.clause());
    validate(program);
    return program;
}

std::set<Fact> parse_facts(std::string_view text) {
    Parser parser(text);
    std::set<Fact> facts;
    Signatures signatures;
    while (!parser.at_end()) {
        Atom a = parser.ground_atom();
        note_arity(signatures, a.predicate, a.arity());
        Fact f{std::move(a.predicate), {}};
        for (auto& t : a.args) f.args.push_back(std::move(t.name));
        facts.insert(std::move(f));
    }
    return facts;
}

void check_arities(const Signatures& signatures, const std::set<Fact>& facts) {
    Signatures seen = signatures;
    for (const auto& f : facts) note_arity(seen, f.predicate, f.args.size());
}

Program definite_subprogram(const Program& program) {
    Program out;
    for (const auto& rule : program.rules)
        if (rule.is_definite()) out.rules.push_back(rule);
    validate(out);
    return out;
}

std::string to_string(const Term& term) { return term.name; }

std::string to_string(const Atom& atom) {
    std::string s = atom.predicate;
    if (!atom.args.empty()) {
        s += '(';
        for (std::size_t i = 0; i < atom.args.size(); ++i) {
            if (i) s += ',';
            s += atom.args[i].name;
        }
        s += ')';
    }
    return s;
}

std::string to_string(const Rule& rule) {
    std::string s = to_string(rule.head);
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        s += i ? ", " : " :- ";
        if (rule.body[i].negated) s += "not ";
        s += to_string(rule.body[i].atom);
    }
    s += '.';
    return s;
}

std::string to_string(const Program& program) {
    std::string s;
    for (const auto& rule : program.rules) {
        s += to_string(rule);
        s += '\n';
    }
    return s;
}

std::string to_string(const Fact& fact) {
    std::string s = fact.predicate;
    if (!fact.args.empty()) {
        s += '(';
        for (std::size_t i = 0; i < fact.args.size(); ++i) {
            if (i) s += ',';
            s += fact.args[i];
        }
        s += ')';
    }
    s += '.';
    return s;
}

}  // namespace wfsmr
