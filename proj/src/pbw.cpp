#include "n2/pbw.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace n2 {

std::string PbwMonomial::str(const AlgebraSpec& s) const {
    if (factors.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (auto& [g, e] : factors) {
        if (!first) os << " ";
        first = false;
        os << s.fam(g).name << "(" << qq_str(g.mode()) << ")";
        if (e > 1) os << "^" << e;
    }
    return os.str();
}

std::string EnvElement::str(const AlgebraSpec& s) const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [m, c] : terms) {
        if (!first) os << " + ";
        first = false;
        os << qq_str(c) << "*" << m.str(s);
    }
    return os.str();
}

namespace {

struct WordKey {
    std::vector<GeneratorMode> w;
    friend auto operator<=>(const WordKey& a, const WordKey& b) { return a.w <=> b.w; }
    friend bool operator==(const WordKey&, const WordKey&) = default;
};

long inversions(const AlgebraSpec& s, const std::vector<GeneratorMode>& w) {
    long inv = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j)
            if (s.pbw_less(w[j], w[i])) ++inv;
    return inv;
}

PbwMonomial compress(const std::vector<GeneratorMode>& w) {
    PbwMonomial m;
    for (auto& g : w) {
        if (!m.factors.empty() && m.factors.back().first == g)
            ++m.factors.back().second;
        else
            m.factors.push_back({g, 1});
    }
    return m;
}

}  // namespace

EnvElement normal_order(const AlgebraSpec& spec, const RawExpr& e, long degree_cap) {
    // Worklist of unordered words; ordered words are compressed into the
    // result. Termination metric per word: (inversions, degree) lex.
    std::map<WordKey, QQ> work;
    for (auto& rw : e) {
        if (rw.coeff == 0) continue;
        for (auto& g : rw.letters) spec.validate_mode(g);
        if (static_cast<long>(rw.letters.size()) > degree_cap)
            throw std::invalid_argument("monomial degree exceeds cap");
        auto [it, fresh] = work.emplace(WordKey{rw.letters}, rw.coeff);
        if (!fresh) it->second += rw.coeff;
    }

    EnvElement out;
    while (!work.empty()) {
        auto node = work.extract(work.begin());
        const std::vector<GeneratorMode>& w = node.key().w;
        const QQ coeff = node.mapped();
        if (coeff == 0) continue;

        // Find first adjacent disorder (strict inversion or odd square).
        std::size_t pos = w.size();
        bool odd_square = false;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (spec.pbw_less(w[i + 1], w[i])) {
                pos = i;
                break;
            }
            if (w[i] == w[i + 1] && spec.odd(w[i])) {
                pos = i;
                odd_square = true;
                break;
            }
        }
        if (pos == w.size()) {
            out.add(compress(w), coeff);
            continue;
        }

        const GeneratorMode x = w[pos], y = w[pos + 1];
        LinComb br = bracket(spec, x, y);

        auto push = [&](std::vector<GeneratorMode>&& nw, const QQ& c) {
            if (c == 0) return;
            if (static_cast<long>(nw.size()) > degree_cap)
                throw std::invalid_argument("monomial degree exceeds cap");
            auto [it, fresh] = work.emplace(WordKey{std::move(nw)}, c);
            if (!fresh) {
                it->second += c;
                if (it->second == 0) work.erase(it);
            }
        };

        if (odd_square) {
            // x x = (1/2)[x,x] (anticommutator); for G/Psi families this is 0.
            for (auto& [key, cval] : br.terms) {
                std::vector<GeneratorMode> nw;
                nw.reserve(w.size() - 1);
                nw.insert(nw.end(), w.begin(), w.begin() + pos);
                nw.push_back(GeneratorMode{key.second, key.first});
                nw.insert(nw.end(), w.begin() + pos + 2, w.end());
                push(std::move(nw), coeff * cval / 2);
            }
            if (br.scalar != 0) {
                std::vector<GeneratorMode> nw;
                nw.insert(nw.end(), w.begin(), w.begin() + pos);
                nw.insert(nw.end(), w.begin() + pos + 2, w.end());
                push(std::move(nw), coeff * br.scalar / 2);
            }
            continue;
        }

        // x y = (-1)^{|x||y|} y x + [x,y]
        const QQ sign = (spec.odd(x) && spec.odd(y)) ? qq(-1) : qq(1);
        {
            std::vector<GeneratorMode> nw = w;
            std::swap(nw[pos], nw[pos + 1]);
            push(std::move(nw), coeff * sign);
        }
        for (auto& [key, cval] : br.terms) {
            std::vector<GeneratorMode> nw;
            nw.reserve(w.size() - 1);
            nw.insert(nw.end(), w.begin(), w.begin() + pos);
            nw.push_back(GeneratorMode{key.second, key.first});
            nw.insert(nw.end(), w.begin() + pos + 2, w.end());
            push(std::move(nw), coeff * cval);
        }
        if (br.scalar != 0) {
            std::vector<GeneratorMode> nw;
            nw.insert(nw.end(), w.begin(), w.begin() + pos);
            nw.insert(nw.end(), w.begin() + pos + 2, w.end());
            push(std::move(nw), coeff * br.scalar);
        }
    }
    return out;
}

namespace {

std::vector<GeneratorMode> expand(const PbwMonomial& m) {
    std::vector<GeneratorMode> w;
    for (auto& [g, e] : m.factors)
        for (uint32_t i = 0; i < e; ++i) w.push_back(g);
    return w;
}

}  // namespace

EnvElement multiply(const AlgebraSpec& spec, const EnvElement& a, const EnvElement& b,
                    long degree_cap) {
    RawExpr raw;
    for (auto& [ma, ca] : a.terms)
        for (auto& [mb, cb] : b.terms) {
            RawWord rw;
            rw.coeff = ca * cb;
            rw.letters = expand(ma);
            auto wb = expand(mb);
            rw.letters.insert(rw.letters.end(), wb.begin(), wb.end());
            raw.push_back(std::move(rw));
        }
    return normal_order(spec, raw, degree_cap);
}

EnvElement mode_times(const AlgebraSpec& spec, GeneratorMode x, const EnvElement& e,
                      long degree_cap) {
    return multiply(spec, EnvElement::generator(x), e, degree_cap);
}

EnvElement parse_words(const AlgebraSpec& spec, const std::string& text) {
    // Grammar: sum of words, "+"/"-" separated; word = [coeff *] factors;
    // factor = NAME(mode)[^exp].
    RawExpr raw;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip_ws();
    QQ pending_sign(1);
    while (i < text.size()) {
        skip_ws();
        if (i >= text.size()) break;
        if (text[i] == '+') {
            pending_sign = 1;
            ++i;
            continue;
        }
        if (text[i] == '-') {
            pending_sign = -1;
            ++i;
            continue;
        }
        RawWord rw;
        rw.coeff = pending_sign;
        pending_sign = 1;
        bool any = false;
        while (true) {
            skip_ws();
            if (i >= text.size() || text[i] == '+' || text[i] == '-') break;
            if (text[i] == '*') {
                ++i;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(text[i]))) {
                std::size_t j = i;
                while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) ||
                                           text[j] == '/'))
                    ++j;
                rw.coeff *= parse_qq(text.substr(i, j - i));
                i = j;
                any = true;
                continue;
            }
            std::size_t j = i;
            while (j < text.size() && text[j] != '(') ++j;
            if (j >= text.size()) throw std::invalid_argument("expected '(' in expression");
            std::string fname = text.substr(i, j - i);
            while (!fname.empty() && std::isspace(static_cast<unsigned char>(fname.back())))
                fname.pop_back();
            std::size_t k = text.find(')', j);
            if (k == std::string::npos) throw std::invalid_argument("unbalanced ')'");
            QQ mode = parse_qq(text.substr(j + 1, k - j - 1));
            i = k + 1;
            uint32_t exp = 1;
            if (i < text.size() && text[i] == '^') {
                ++i;
                std::size_t e0 = i;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                exp = static_cast<uint32_t>(std::stoul(text.substr(e0, i - e0)));
            }
            GeneratorMode g = spec.gen(fname, mode);
            for (uint32_t t = 0; t < exp; ++t) rw.letters.push_back(g);
            any = true;
        }
        if (any) raw.push_back(std::move(rw));
    }
    return normal_order(spec, raw);
}

}  // namespace n2
