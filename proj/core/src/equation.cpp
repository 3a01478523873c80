#include "cotlab/equation.hpp"

#include <charconv>
#include <utility>

#include "cotlab/errors.hpp"

namespace cotlab {

LinearSystem::LinearSystem(std::size_t m_, std::int64_t p_) : m(m_), p(p_), A(m_ * m_, 0), b(m_, 0) {
    if (!is_prime(p_)) throw NotPrime("modulus " + std::to_string(p_) + " is not prime");
}

std::string variable_token(std::size_t k) { return "x" + std::to_string(k + 1); }

namespace {

bool read_int(const std::string& t, std::int64_t& v) {
    if (t.empty() || t[0] == '-' || t[0] == '+') return false;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    return ec == std::errc() && ptr == t.data() + t.size();
}

bool read_var(const std::string& t, std::size_t& k) {
    if (t.size() < 2 || t[0] != 'x') return false;
    std::int64_t v = 0;
    if (!read_int(t.substr(1), v) || v < 1) return false;
    k = static_cast<std::size_t>(v - 1);
    return true;
}

std::int64_t inv(std::int64_t a, std::int64_t p) { return inverse(FieldElement(a, p)).value(); }

}  // namespace

LinearSystem parse_system_tokens(const Tokens& toks, std::int64_t p) {
    struct Row {
        std::vector<std::pair<std::size_t, std::int64_t>> terms;
        std::int64_t rhs = 0;
    };
    std::vector<Row> rows;
    std::size_t i = 0, max_var = 0;
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw ParseError(what, i);
    };
    while (i < toks.size()) {
        Row row;
        for (;;) {
            std::int64_t c = 1;
            std::size_t k = 0;
            need(i < toks.size(), "expected a term");
            if (read_int(toks[i], c)) {
                need(c < p, "coefficient outside the field");
                ++i;
                need(i < toks.size(), "expected a variable");
            }
            need(read_var(toks[i], k), "expected a variable");
            ++i;
            for (const auto& [kk, cc] : row.terms) need(kk != k, "variable repeated in one equation");
            row.terms.emplace_back(k, c);
            max_var = std::max(max_var, k + 1);
            need(i < toks.size(), "missing '='");
            if (toks[i] == "+") {
                ++i;
                continue;
            }
            need(toks[i] == "=", "missing '='");
            ++i;
            break;
        }
        need(i < toks.size() && read_int(toks[i], row.rhs), "expected right-hand side");
        need(row.rhs < p, "right-hand side outside the field");
        ++i;
        need(i < toks.size() && toks[i] == ",", "expected ','");
        ++i;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("empty system", 0);
    if (max_var > rows.size()) throw ParseError("more variables than equations", toks.size());
    LinearSystem s(rows.size(), p);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const auto& [k, c] : rows[r].terms) s.a(r, k) = c;
        s.b[r] = rows[r].rhs;
    }
    return s;
}

LinearSystem parse_system(std::string_view text, std::int64_t p) { return parse_system_tokens(split_ws(text), p); }

Tokens render_system(const LinearSystem& s, std::size_t step) {
    Tokens out;
    for (std::size_t j = 0; j < s.m; ++j) {
        bool first = true;
        auto term = [&](std::size_t k, bool bare) {
            if (!first) out.emplace_back("+");
            first = false;
            if (!bare) out.push_back(std::to_string(s.a(j, k)));
            out.push_back(variable_token(k));
        };
        for (std::size_t k = 0; k < s.m; ++k) {
            const bool suppressed = step > 0 && k < step;
            if (suppressed) {
                if (j < step && s.a(j, k) != 0) term(k, s.a(j, k) == 1);
            } else {
                term(k, false);
            }
        }
        out.emplace_back("=");
        out.push_back(std::to_string(s.b[j]));
        out.emplace_back(",");
    }
    return out;
}

std::string render_system_text(const LinearSystem& s, std::size_t step) { return join(render_system(s, step)); }

GaussState gauss_step(const GaussState& state) {
    const LinearSystem& in = state.system;
    const std::size_t i = state.step;  // 0-based column being eliminated
    if (i >= in.m) throw SingularSystem("no variable left to eliminate");
    std::size_t pivot = in.m;
    for (std::size_t k = i; k < in.m && pivot == in.m; ++k) {
        bool clean = in.a(k, i) != 0;
        for (std::size_t c = 0; c < i && clean; ++c) clean = in.a(k, c) == 0;
        if (clean) pivot = k;
    }
    if (pivot == in.m) throw SingularSystem("no pivot for x" + std::to_string(i + 1));

    GaussState out{i + 1, in, pivot};
    LinearSystem& s = out.system;
    const std::int64_t p = s.p;
    if (pivot != i) {
        for (std::size_t c = 0; c < s.m; ++c) std::swap(s.a(i, c), s.a(pivot, c));
        std::swap(s.b[i], s.b[pivot]);
    }
    const std::int64_t scale = inv(s.a(i, i), p);
    for (std::size_t c = 0; c < s.m; ++c) s.a(i, c) = mulmod(s.a(i, c), scale, p);
    s.b[i] = mulmod(s.b[i], scale, p);
    for (std::size_t j = 0; j < s.m; ++j) {
        if (j == i) continue;
        const std::int64_t f = s.a(j, i);
        if (f == 0) continue;
        for (std::size_t c = 0; c < s.m; ++c) s.a(j, c) = mod_normalize(s.a(j, c) - mulmod(f, s.a(i, c), p), p);
        s.b[j] = mod_normalize(s.b[j] - mulmod(f, s.b[i], p), p);
    }
    return out;
}

CotSample gauss_trace(const LinearSystem& s) {
    CotSample out;
    out.task = Task::equation;
    out.problem = render_system(s, 0);
    GaussState st{0, s, 0};
    for (std::size_t i = 1; i <= s.m; ++i) {
        st = gauss_step(st);
        if (i < s.m) out.steps.push_back(render_system(st.system, i));
    }
    out.answer = render_system(st.system, s.m);
    return out;
}

std::vector<std::int64_t> solve_direct(const LinearSystem& s) {
    const std::size_t m = s.m;
    const std::int64_t p = s.p;
    std::vector<std::vector<std::int64_t>> aug(m, std::vector<std::int64_t>(m + 1));
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) aug[r][c] = s.a(r, c);
        aug[r][m] = s.b[r];
    }
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t r = c;
        while (r < m && aug[r][c] == 0) ++r;
        if (r == m) throw SingularSystem("matrix is singular mod " + std::to_string(p));
        std::swap(aug[r], aug[c]);
        const std::int64_t iv = inv(aug[c][c], p);
        for (auto& v : aug[c]) v = mulmod(v, iv, p);
        for (std::size_t k = c + 1; k < m; ++k) {
            const std::int64_t f = aug[k][c];
            if (f == 0) continue;
            for (std::size_t j = c; j <= m; ++j) aug[k][j] = mod_normalize(aug[k][j] - mulmod(f, aug[c][j], p), p);
        }
    }
    std::vector<std::int64_t> x(m);
    for (std::size_t c = m; c-- > 0;) {
        std::int64_t v = aug[c][m];
        for (std::size_t j = c + 1; j < m; ++j) v = mod_normalize(v - mulmod(aug[c][j], x[j], p), p);
        x[c] = v;
    }
    return x;
}

std::int64_t determinant(const LinearSystem& s) {
    const std::size_t m = s.m;
    const std::int64_t p = s.p;
    std::vector<std::int64_t> a = s.A;
    std::int64_t det = 1;
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t r = c;
        while (r < m && a[r * m + c] == 0) ++r;
        if (r == m) return 0;
        if (r != c) {
            for (std::size_t j = 0; j < m; ++j) std::swap(a[r * m + j], a[c * m + j]);
            det = mod_normalize(-det, p);
        }
        det = mulmod(det, a[c * m + c], p);
        const std::int64_t iv = inv(a[c * m + c], p);
        for (std::size_t k = c + 1; k < m; ++k) {
            const std::int64_t f = mulmod(a[k * m + c], iv, p);
            for (std::size_t j = c; j < m; ++j) a[k * m + j] = mod_normalize(a[k * m + j] - mulmod(f, a[c * m + j], p), p);
        }
    }
    return det;
}

std::vector<std::int64_t> residual(const LinearSystem& s, const std::vector<std::int64_t>& x) {
    if (x.size() != s.m) throw DimensionMismatch("assignment length differs from m");
    std::vector<std::int64_t> r(s.m);
    for (std::size_t i = 0; i < s.m; ++i) {
        std::int64_t acc = 0;
        for (std::size_t j = 0; j < s.m; ++j) acc = mod_normalize(acc + mulmod(s.a(i, j), x[j], s.p), s.p);
        r[i] = mod_normalize(acc - s.b[i], s.p);
    }
    return r;
}

}  // namespace cotlab
