#include "linlayout/text_format.hpp"

#include "linlayout/error.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace linlayout {

namespace {

std::string dims_string(const std::vector<DimLabel> &dims) {
  std::string s;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i)
      s += ',';
    s += dims[i].name + ":" + std::to_string(dims[i].bits);
  }
  return s;
}

class LineCursor {
public:
  LineCursor(std::string_view line, int lineno) : s_(line), lineno_(lineno) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c))
      fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void expect_word(std::string_view w) {
    skip_ws();
    if (s_.substr(pos_, w.size()) != w)
      fail("expected '" + std::string(w) + "'");
    pos_ += w.size();
  }
  std::string ident() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '_' || s_[pos_] == '.' || s_[pos_] == '-' ||
            s_[pos_] == '%'))
      ++pos_;
    if (start == pos_)
      fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }
  std::uint64_t number() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    if (start == pos_)
      fail("expected a number");
    return std::stoull(std::string(s_.substr(start, pos_ - start)));
  }
  [[noreturn]] void fail(const std::string &msg) const {
    std::ostringstream os;
    os << "line " << lineno_ << ", column " << pos_ + 1 << ": " << msg;
    throw Error(os.str());
  }

private:
  std::string_view s_;
  size_t pos_ = 0;
  int lineno_;
};

std::vector<DimLabel> parse_dims(LineCursor &c) {
  std::vector<DimLabel> dims;
  c.expect('(');
  if (c.peek(')')) {
    c.expect(')');
    return dims;
  }
  while (true) {
    std::string name = c.ident();
    c.expect(':');
    dims.push_back({name, static_cast<int>(c.number())});
    if (c.peek(',')) {
      c.expect(',');
      continue;
    }
    c.expect(')');
    return dims;
  }
}

} // namespace

std::string print_layout(std::string_view name, const LinearLayout &l) {
  std::ostringstream os;
  os << "layout " << name << " in(" << dims_string(l.ins()) << ") out("
     << dims_string(l.outs()) << ")\n";
  for (const DimLabel &d : l.ins()) {
    os << d.name << ":";
    for (int b = 0; b < d.bits; ++b) {
      BitVec c = l.column(d.name, b);
      if (c == 0) {
        os << " 0";
        continue;
      }
      TensorPoint p = l.unpack_out(c);
      os << " (";
      for (size_t k = 0; k < p.size(); ++k)
        os << (k ? "," : "") << p[k];
      os << ")";
    }
    os << "\n";
  }
  return os.str();
}

std::string print_matrix_comment(const LinearLayout &l) {
  std::vector<std::string> labels;
  size_t lw = 0;
  for (int r = 0; r < l.out_bits(); ++r) {
    std::string label;
    for (const DimLabel &d : l.outs()) {
      int off = l.out_offset(d.name);
      if (r >= off && r < off + d.bits)
        label = d.name + "." + std::to_string(r - off);
    }
    lw = std::max(lw, label.size());
    labels.push_back(label);
  }
  // Each input block is as wide as the wider of its header and its bits.
  std::vector<std::string> heads;
  std::vector<size_t> widths;
  for (const DimLabel &d : l.ins()) {
    heads.push_back(d.name + "[" + std::to_string(d.bits) + "]");
    widths.push_back(std::max<size_t>(heads.back().size(), 2 * d.bits - (d.bits > 0)));
  }
  auto pad = [](std::string s, size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };

  std::ostringstream os;
  os << "# matrix: rows are flattened tensor bits, columns are input bits "
        "(LSB first)\n";
  os << "# " << pad("", lw);
  for (size_t i = 0; i < heads.size(); ++i)
    os << " | " << pad(heads[i], widths[i]);
  os << "\n";
  for (int r = 0; r < l.out_bits(); ++r) {
    os << "# " << pad(labels[r], lw);
    int col = 0;
    for (size_t i = 0; i < l.ins().size(); ++i) {
      std::string cells;
      for (int b = 0; b < l.ins()[i].bits; ++b, ++col)
        cells += std::string(b ? " " : "") + (l.matrix().get(r, col) ? '1' : '0');
      os << " | " << pad(cells, widths[i]);
    }
    os << "\n";
  }
  std::string out = os.str();
  // Drop trailing blanks left by padding.
  std::string trimmed;
  std::istringstream lines(out);
  for (std::string line; std::getline(lines, line);) {
    line.erase(line.find_last_not_of(' ') + 1);
    trimmed += line + "\n";
  }
  return trimmed;
}

std::vector<NamedLayout> parse_layouts(std::string_view text) {
  std::vector<std::pair<int, std::string_view>> lines;
  int lineno = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    ++lineno;
    std::string_view line = text.substr(start, end - start);
    size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#')
      lines.emplace_back(lineno, line);
    start = end + 1;
  }

  std::vector<NamedLayout> out;
  size_t i = 0;
  while (i < lines.size()) {
    LineCursor head(lines[i].second, lines[i].first);
    head.expect_word("layout");
    std::string name = head.ident();
    head.expect_word("in");
    std::vector<DimLabel> ins = parse_dims(head);
    head.expect_word("out");
    std::vector<DimLabel> outs = parse_dims(head);
    if (!head.at_end())
      head.fail("trailing text after header");
    ++i;

    int header_line = lines[i - 1].first;
    LinearLayout::Bases bases;
    for (const DimLabel &d : ins) {
      if (i >= lines.size())
        throw Error("layout " + name + ": missing line for input label '" +
                    d.name + "'");
      LineCursor c(lines[i].second, lines[i].first);
      if (c.ident() != d.name)
        c.fail("expected line for input label '" + d.name + "'");
      c.expect(':');
      std::vector<std::vector<std::uint64_t>> imgs;
      while (!c.at_end()) {
        if (c.peek('(')) {
          c.expect('(');
          std::vector<std::uint64_t> coords;
          if (!c.peek(')')) {
            while (true) {
              coords.push_back(c.number());
              if (c.peek(',')) {
                c.expect(',');
                continue;
              }
              break;
            }
          }
          c.expect(')');
          if (coords.size() != outs.size())
            c.fail("tuple has " + std::to_string(coords.size()) +
                   " coordinates, expected " + std::to_string(outs.size()));
          imgs.push_back(std::move(coords));
        } else {
          if (c.number() != 0)
            c.fail("expected a tuple or 0");
          imgs.emplace_back(outs.size(), 0);
        }
      }
      if (static_cast<int>(imgs.size()) != d.bits)
        c.fail("label '" + d.name + "' lists " + std::to_string(imgs.size()) +
               " bases, header says " + std::to_string(d.bits));
      bases.emplace_back(d.name, std::move(imgs));
      ++i;
    }
    try {
      out.push_back({name, LinearLayout::from_bases(bases, outs)});
    } catch (const Error &e) {
      throw Error("layout " + name + " (line " + std::to_string(header_line) +
                  "): " + e.what());
    }
  }
  return out;
}

NamedLayout parse_layout(std::string_view text) {
  std::vector<NamedLayout> all = parse_layouts(text);
  if (all.size() != 1)
    throw Error("expected exactly one layout, found " +
                std::to_string(all.size()));
  return all.front();
}

std::vector<NamedLayout> read_layout_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open layout file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_layouts(ss.str());
}

} // namespace linlayout
