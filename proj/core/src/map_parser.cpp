#include "map_nodes.hpp"
#include "twistlab/maps.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace twistlab {

namespace {

using detail::make_map_node;

class Cursor {
  public:
    explicit Cursor(const std::string& text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eof() {
        skip_ws();
        return pos_ >= text_.size();
    }

    size_t pos() const { return pos_; }

    char peek() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        return text_[pos_];
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string ident() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) throw ParseError("expected a map keyword", pos_);
        return text_.substr(start, pos_ - start);
    }

    double number() {
        skip_ws();
        size_t start = pos_;
        double value = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + text_.size(), value);
        if (res.ec != std::errc{}) throw ParseError("expected a number", start);
        pos_ = static_cast<size_t>(res.ptr - text_.data());
        return value;
    }

  private:
    const std::string& text_;
    size_t pos_ = 0;
};

Mat parse_matrix(Cursor& cur) {
    cur.expect('[');
    std::vector<std::vector<double>> rows;
    do {
        cur.expect('[');
        std::vector<double> row;
        if (!cur.accept(']')) {
            do {
                row.push_back(cur.number());
            } while (cur.accept(','));
            cur.expect(']');
        }
        if (!rows.empty() && rows.front().size() != row.size())
            throw ParseError("matrix rows have unequal lengths", cur.pos());
        rows.push_back(std::move(row));
    } while (cur.accept(','));
    cur.expect(']');
    if (rows.empty() || rows.front().empty()) throw ParseError("empty matrix", cur.pos());
    Mat m(rows.size(), rows.front().size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

HomMap::NodePtr parse_expr(Cursor& cur, const NormedSpace& domain, const NormedSpace& codomain) {
    size_t at = cur.pos();
    std::string kw = cur.ident();
    if (kw == "zero") return make_map_node(NodeKind::Zero, domain, codomain);
    if (kw == "kp") {
        if (domain.dim() != codomain.dim())
            throw ParseError("kp node requires equal domain and codomain dimensions, got " +
                                 std::to_string(domain.dim()) + " -> " + std::to_string(codomain.dim()),
                             at);
        return make_map_node(NodeKind::KaltonPeck, domain, codomain);
    }
    if (kw == "linear") {
        cur.expect('(');
        Mat m = parse_matrix(cur);
        cur.expect(')');
        if (m.rows() != codomain.dim() || m.cols() != domain.dim())
            throw ParseError("linear node matrix is " + std::to_string(m.rows()) + "x" +
                                 std::to_string(m.cols()) + ", expected " +
                                 std::to_string(codomain.dim()) + "x" + std::to_string(domain.dim()),
                             at);
        return make_map_node(NodeKind::Linear, domain, codomain, std::move(m));
    }
    if (kw == "delta") {
        if (!domain.is_euclidean() || !codomain.is_euclidean())
            throw ParseError("delta node requires Euclidean domain and codomain", at);
        if (domain.dim() % 2 != 0) throw ParseError("delta node requires even domain dimension", at);
        int m = domain.dim() / 2;
        int rr = codomain.dim() - m;
        if (rr <= 0 || rr % 2 != 0)
            throw ParseError("delta node requires codomain dimension 2r+m with r >= 1, got " +
                                 std::to_string(codomain.dim()) + " for m = " + std::to_string(m),
                             at);
        int r = rr / 2;
        cur.expect('(');
        auto inner = parse_expr(cur, NormedSpace::l2(m), NormedSpace::l2(r));
        cur.expect(')');
        return make_map_node(NodeKind::EnfloDelta, domain, codomain, {}, 1.0, inner);
    }
    if (kw == "scale") {
        cur.expect('(');
        double c = cur.number();
        cur.expect(',');
        auto inner = parse_expr(cur, domain, codomain);
        cur.expect(')');
        return make_map_node(NodeKind::Scale, domain, codomain, {}, c, inner);
    }
    if (kw == "sum") {
        cur.expect('(');
        auto a = parse_expr(cur, domain, codomain);
        cur.expect(',');
        auto b = parse_expr(cur, domain, codomain);
        cur.expect(')');
        return make_map_node(NodeKind::Sum, domain, codomain, {}, 1.0, a, b);
    }
    if (kw == "pre") {
        cur.expect('(');
        Mat m = parse_matrix(cur);
        cur.expect(',');
        if (m.cols() != domain.dim())
            throw ParseError("pre node matrix has " + std::to_string(m.cols()) +
                                 " columns, expected " + std::to_string(domain.dim()),
                             at);
        auto inner = parse_expr(cur, NormedSpace::l2(static_cast<int>(m.rows())), codomain);
        cur.expect(')');
        return make_map_node(NodeKind::PreLinear, domain, codomain, std::move(m), 1.0, inner);
    }
    if (kw == "post") {
        cur.expect('(');
        Mat m = parse_matrix(cur);
        cur.expect(',');
        if (m.rows() != codomain.dim())
            throw ParseError("post node matrix has " + std::to_string(m.rows()) +
                                 " rows, expected " + std::to_string(codomain.dim()),
                             at);
        auto inner = parse_expr(cur, domain, NormedSpace::l2(static_cast<int>(m.cols())));
        cur.expect(')');
        return make_map_node(NodeKind::PostLinear, domain, codomain, std::move(m), 1.0, inner);
    }
    throw ParseError("unknown map keyword '" + kw + "'", at);
}

} // namespace

HomMap parse_map(const std::string& text, const NormedSpace& domain, const NormedSpace& codomain) {
    Cursor cur(text);
    auto root = parse_expr(cur, domain, codomain);
    if (!cur.eof()) throw ParseError("trailing input after map expression", cur.pos());
    return HomMap(domain, codomain, root);
}

} // namespace twistlab
