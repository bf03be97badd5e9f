#include "symstab/system_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace symstab {

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double parse_number(const std::string& token, const std::string& origin, int line) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + token.size())
    throw LoadError(origin, line, "malformed number '" + token + "'");
  return v;
}

long parse_integer(const std::string& token, const std::string& origin, int line) {
  const char* begin = token.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end != begin + token.size())
    throw LoadError(origin, line, "malformed integer '" + token + "'");
  return v;
}

struct RawTripleRow {
  int i, j, k;
  double value;
};

struct RawGenerator {
  int index = 0;
  int line = 0;
  std::vector<std::vector<double>> A_rows;
  std::vector<double> b;
  bool has_A = false, has_b = false;
};

// Parsed file before semantic assembly.
struct RawDoc {
  std::string name;
  int n = -1;
  std::vector<std::string> coords;
  std::vector<std::string> periodic;
  int algebra_dim = -1;
  std::vector<RawTripleRow> triples;
  std::vector<std::vector<double>> metric_rows;
  bool has_metric = false;
  double rank_tolerance = kDefaultRankTol;
  bool has_rank_tolerance = false;
  std::vector<RawGenerator> generators;
  std::string hamiltonian;
  bool proper_action = false;

  int line_system = 0, line_phase = 0, line_algebra = 0, line_hamiltonian = 0;
  int line_h_value = 0;
};

class DocParser {
 public:
  DocParser(std::string_view text, std::string origin)
      : origin_(std::move(origin)) {
    std::string current;
    for (char c : text) {
      if (c == '\n') {
        lines_.push_back(current);
        current.clear();
      } else {
        current += c;
      }
    }
    if (!current.empty()) lines_.push_back(current);
  }

  RawDoc parse() {
    RawDoc doc;
    std::string section;
    RawGenerator* gen = nullptr;
    bool any_content = false;

    for (int ln = 1; ln <= static_cast<int>(lines_.size()); ++ln) {
      std::string line = lines_[static_cast<std::size_t>(ln - 1)];
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      any_content = true;

      if (line.front() == '[') {
        if (line.back() != ']') throw LoadError(origin_, ln, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        gen = nullptr;
        if (section == "system") {
          doc.line_system = ln;
        } else if (section == "phase_space") {
          doc.line_phase = ln;
        } else if (section == "algebra") {
          doc.line_algebra = ln;
        } else if (section == "hamiltonian") {
          doc.line_hamiltonian = ln;
        } else if (section == "assertions") {
        } else if (section.rfind("generator", 0) == 0) {
          auto rest = tokens(section.substr(9));
          if (rest.size() != 1)
            throw LoadError(origin_, ln, "expected [generator <index>]");
          RawGenerator g;
          g.index = static_cast<int>(parse_integer(rest[0], origin_, ln));
          g.line = ln;
          doc.generators.push_back(g);
          gen = &doc.generators.back();
          section = "generator";
        } else {
          throw LoadError(origin_, ln, "unknown section [" + section + "]");
        }
        continue;
      }

      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw LoadError(origin_, ln, "expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));

      std::vector<std::vector<double>> block;
      std::vector<RawTripleRow> triple_block;
      bool is_block = value == "[";
      if (is_block) {
        int start = ln;
        ++ln;
        for (;; ++ln) {
          if (ln > static_cast<int>(lines_.size()))
            throw LoadError(origin_, start, "missing closing ']' for '" + key + "'");
          std::string row = lines_[static_cast<std::size_t>(ln - 1)];
          if (auto hash = row.find('#'); hash != std::string::npos) row.resize(hash);
          row = trim(row);
          if (row.empty()) continue;
          if (row == "]") break;
          auto toks = tokens(row);
          if (key == "c" && section == "algebra") {
            if (toks.size() != 4)
              throw LoadError(origin_, ln, "structure constant rows are 'i j k value'");
            triple_block.push_back({static_cast<int>(parse_integer(toks[0], origin_, ln)),
                                    static_cast<int>(parse_integer(toks[1], origin_, ln)),
                                    static_cast<int>(parse_integer(toks[2], origin_, ln)),
                                    parse_number(toks[3], origin_, ln)});
          } else {
            std::vector<double> vals;
            for (const auto& t : toks) vals.push_back(parse_number(t, origin_, ln));
            block.push_back(std::move(vals));
          }
        }
      }

      if (section == "system") {
        if (key == "name")
          doc.name = value;
        else
          throw LoadError(origin_, ln, "unknown key '" + key + "' in [system]");
      } else if (section == "phase_space") {
        if (key == "n")
          doc.n = static_cast<int>(parse_integer(value, origin_, ln));
        else if (key == "coords")
          doc.coords = tokens(value);
        else if (key == "periodic")
          doc.periodic = tokens(value);
        else
          throw LoadError(origin_, ln, "unknown key '" + key + "' in [phase_space]");
      } else if (section == "algebra") {
        if (key == "dim") {
          doc.algebra_dim = static_cast<int>(parse_integer(value, origin_, ln));
        } else if (key == "metric") {
          if (!is_block) throw LoadError(origin_, ln, "metric must be a [ ... ] block");
          doc.metric_rows = std::move(block);
          doc.has_metric = true;
        } else if (key == "c") {
          if (!is_block) throw LoadError(origin_, ln, "c must be a [ ... ] block");
          for (const auto& t : triple_block) {
            if (t.i < 1 || t.j < 1 || t.k < 1)
              throw LoadError(origin_, ln, "structure-constant indices are 1-based");
            if (t.i >= t.j)
              throw LoadError(origin_, ln, "structure constants require i < j");
          }
          doc.triples = std::move(triple_block);
        } else if (key == "rank_tolerance") {
          doc.rank_tolerance = parse_number(value, origin_, ln);
          doc.has_rank_tolerance = true;
          if (!(doc.rank_tolerance > 0))
            throw LoadError(origin_, ln, "rank_tolerance must be positive");
        } else {
          throw LoadError(origin_, ln, "unknown key '" + key + "' in [algebra]");
        }
      } else if (section == "generator") {
        if (!gen) throw LoadError(origin_, ln, "key outside of a [generator] section");
        if (key == "A") {
          if (!is_block) throw LoadError(origin_, ln, "A must be a [ ... ] block");
          gen->A_rows = std::move(block);
          gen->has_A = true;
        } else if (key == "b") {
          for (const auto& t : tokens(value)) gen->b.push_back(parse_number(t, origin_, ln));
          gen->has_b = true;
        } else {
          throw LoadError(origin_, ln, "unknown key '" + key + "' in [generator]");
        }
      } else if (section == "hamiltonian") {
        if (key == "h") {
          doc.hamiltonian = value;
          doc.line_h_value = ln;
        } else {
          throw LoadError(origin_, ln, "unknown key '" + key + "' in [hamiltonian]");
        }
      } else if (section == "assertions") {
        if (key == "proper_action") {
          if (value == "true")
            doc.proper_action = true;
          else if (value == "false")
            doc.proper_action = false;
          else
            throw LoadError(origin_, ln, "proper_action must be true or false");
        } else {
          throw LoadError(origin_, ln, "unknown key '" + key + "' in [assertions]");
        }
      } else {
        throw LoadError(origin_, ln, "key '" + key + "' appears before any section");
      }
    }

    if (!any_content) throw LoadError(origin_, 1, "empty system file");
    return doc;
  }

 private:
  std::string origin_;
  std::vector<std::string> lines_;
};

std::string canonical_text(const RawDoc& doc, const Expr& hamiltonian) {
  std::ostringstream out;
  out << "[system]\nname = " << doc.name << "\n\n";
  out << "[phase_space]\nn = " << doc.n << "\ncoords =";
  for (const auto& c : doc.coords) out << " " << c;
  out << "\nperiodic =";
  for (const auto& c : doc.coords)
    if (std::find(doc.periodic.begin(), doc.periodic.end(), c) != doc.periodic.end())
      out << " " << c;
  out << "\n\n[algebra]\ndim = " << doc.algebra_dim << "\n";
  out << "rank_tolerance = " << fmt(doc.rank_tolerance) << "\n";
  if (doc.algebra_dim > 0) {
    out << "metric = [\n";
    for (const auto& row : doc.metric_rows) {
      out << " ";
      for (double v : row) out << " " << fmt(v);
      out << "\n";
    }
    out << "]\n";
  }
  auto triples = doc.triples;
  std::sort(triples.begin(), triples.end(), [](const RawTripleRow& a, const RawTripleRow& b) {
    return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
  });
  if (!triples.empty()) {
    out << "c = [\n";
    for (const auto& t : triples)
      out << "  " << t.i << " " << t.j << " " << t.k << " " << fmt(t.value) << "\n";
    out << "]\n";
  }
  for (const auto& g : doc.generators) {
    out << "\n[generator " << g.index << "]\nA = [\n";
    for (const auto& row : g.A_rows) {
      out << " ";
      for (double v : row) out << " " << fmt(v);
      out << "\n";
    }
    out << "]\nb =";
    for (double v : g.b) out << " " << fmt(v);
    out << "\n";
  }
  out << "\n[hamiltonian]\nh = " << hamiltonian.str(doc.coords) << "\n";
  out << "\n[assertions]\nproper_action = " << (doc.proper_action ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace

std::string digest_hex(std::uint64_t digest) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

LoadedSystem load_system_text(std::string_view text, std::string origin) {
  RawDoc doc = DocParser(text, origin).parse();

  if (doc.name.empty()) throw LoadError(origin, std::max(doc.line_system, 1), "missing system name");
  int phase_line = std::max(doc.line_phase, 1);
  if (doc.n <= 0) throw LoadError(origin, phase_line, "phase space needs n >= 1");
  if (static_cast<int>(doc.coords.size()) != 2 * doc.n)
    throw LoadError(origin, phase_line,
                    "expected " + std::to_string(2 * doc.n) + " coordinate names, got " +
                        std::to_string(doc.coords.size()));
  for (std::size_t i = 0; i < doc.coords.size(); ++i)
    for (std::size_t j = i + 1; j < doc.coords.size(); ++j)
      if (doc.coords[i] == doc.coords[j])
        throw LoadError(origin, phase_line, "duplicate coordinate name '" + doc.coords[i] + "'");

  PhaseSpace space;
  space.n = doc.n;
  space.coords = doc.coords;
  space.periodic.assign(doc.coords.size(), false);
  for (const auto& p : doc.periodic) {
    int idx = space.coordinate_index(p);
    if (idx < 0)
      throw LoadError(origin, phase_line, "periodic coordinate '" + p + "' is not declared");
    space.periodic[static_cast<std::size_t>(idx)] = true;
  }

  int algebra_line = std::max(doc.line_algebra, 1);
  if (doc.algebra_dim < 0) throw LoadError(origin, algebra_line, "missing algebra dim");
  const int d = doc.algebra_dim;
  Eigen::MatrixXd metric;
  if (d == 0) {
    metric = Eigen::MatrixXd(0, 0);
  } else {
    if (!doc.has_metric) throw LoadError(origin, algebra_line, "missing algebra metric");
    if (static_cast<int>(doc.metric_rows.size()) != d)
      throw LoadError(origin, algebra_line, "metric must have dim rows");
    metric.resize(d, d);
    for (int i = 0; i < d; ++i) {
      if (static_cast<int>(doc.metric_rows[static_cast<std::size_t>(i)].size()) != d)
        throw LoadError(origin, algebra_line, "metric row " + std::to_string(i + 1) +
                                                  " must have dim entries");
      for (int j = 0; j < d; ++j)
        metric(i, j) = doc.metric_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  std::vector<StructureTriple> triples;
  std::map<std::tuple<int, int, int>, int> seen;
  for (const auto& t : doc.triples) {
    if (t.i > d || t.j > d || t.k > d)
      throw LoadError(origin, algebra_line, "structure-constant index exceeds dim");
    if (seen.count({t.i, t.j, t.k}))
      throw LoadError(origin, algebra_line, "duplicate structure constant (" +
                                                std::to_string(t.i) + "," + std::to_string(t.j) +
                                                "," + std::to_string(t.k) + ")");
    seen[{t.i, t.j, t.k}] = 1;
    triples.push_back({t.i - 1, t.j - 1, t.k - 1, t.value});
  }

  LieAlgebraSpec algebra = [&]() -> LieAlgebraSpec {
    try {
      return LieAlgebraSpec(d, triples, metric, doc.rank_tolerance);
    } catch (const std::invalid_argument& e) {
      // The ctor only throws for invariant violations here; index and shape
      // problems were rejected above.
      std::string id = std::string(e.what()).find("Jacobi") != std::string::npos
                           ? "jacobi_identity"
                           : "metric_positive_definite";
      std::vector<CheckResult> checks{{id, false, 0.0, 0.0, e.what()}};
      throw LoadError(origin, algebra_line, e.what(), std::move(checks),
                      LoadError::Kind::Validation);
    }
  }();

  if (static_cast<int>(doc.generators.size()) != d)
    throw LoadError(origin, algebra_line,
                    "expected " + std::to_string(d) + " generator sections, found " +
                        std::to_string(doc.generators.size()));
  std::vector<ActionGenerator> generators(static_cast<std::size_t>(d));
  std::vector<bool> have(static_cast<std::size_t>(d), false);
  const int dim = space.dim();
  for (const auto& g : doc.generators) {
    if (g.index < 1 || g.index > d)
      throw LoadError(origin, g.line, "generator index out of range 1.." + std::to_string(d));
    if (have[static_cast<std::size_t>(g.index - 1)])
      throw LoadError(origin, g.line, "duplicate generator " + std::to_string(g.index));
    have[static_cast<std::size_t>(g.index - 1)] = true;
    if (!g.has_A || static_cast<int>(g.A_rows.size()) != dim)
      throw LoadError(origin, g.line, "generator A must have 2n rows");
    ActionGenerator gen;
    gen.A.resize(dim, dim);
    for (int r = 0; r < dim; ++r) {
      if (static_cast<int>(g.A_rows[static_cast<std::size_t>(r)].size()) != dim)
        throw LoadError(origin, g.line, "generator A row " + std::to_string(r + 1) +
                                            " must have 2n entries");
      for (int c = 0; c < dim; ++c)
        gen.A(r, c) = g.A_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    if (!g.has_b || static_cast<int>(g.b.size()) != dim)
      throw LoadError(origin, g.line, "generator b must have 2n entries");
    gen.b = Eigen::Map<const Eigen::VectorXd>(g.b.data(), dim);
    generators[static_cast<std::size_t>(g.index - 1)] = std::move(gen);
  }

  int h_line = doc.line_h_value > 0 ? doc.line_h_value : std::max(doc.line_hamiltonian, 1);
  if (doc.hamiltonian.empty()) throw LoadError(origin, h_line, "missing hamiltonian");
  Expr h = [&] {
    try {
      return parse_expr(doc.hamiltonian, space.coords);
    } catch (const ParseError& e) {
      throw LoadError(origin, h_line,
                      std::string("hamiltonian: ") + e.what() + " (byte offset " +
                          std::to_string(e.offset()) + ")");
    }
  }();

  LoadedSystem loaded;
  try {
    loaded.system =
        build_system(doc.name, space, algebra, std::move(generators), h, doc.proper_action);
  } catch (const SystemValidationError& e) {
    // Anchor validator failures to the most relevant section.
    int line = algebra_line;
    for (const auto& c : e.checks())
      if (!c.ok) {
        if (c.id == "h_invariance" || c.id == "h_periodicity")
          line = h_line;
        else if (c.id == "sp_condition" || c.id == "periodic_mixing" ||
                 c.id == "moment_generates_action")
          line = doc.generators.empty() ? algebra_line : doc.generators.front().line;
        break;
      }
    throw LoadError(origin, line, e.what(), e.checks(), LoadError::Kind::Validation);
  }
  loaded.canonical_text = canonical_text(doc, h);
  loaded.digest = fnv1a64(loaded.canonical_text);
  loaded.origin = origin;
  return loaded;
}

LoadedSystem load_system_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_system_text(buf.str(), path.string());
}

// ---------------------------------------------------------------------------
// Bundled systems
// ---------------------------------------------------------------------------

namespace {

std::string ex16_text() {
  return R"(# Planar rotor coupled to a free angle: the origin of the reduced system
# is stable while every relative equilibrium over it is unstable once the
# conjugate momentum is perturbed.

[system]
name = EX16

[phase_space]
n = 3
coords = q1 q2 theta p1 p2 ptheta
periodic = theta

[algebra]
dim = 1
metric = [
  1
]

[generator 1]
A = [
  0 0 0 0 0 0
  0 0 0 0 0 0
  0 0 0 0 0 0
  0 0 0 0 0 0
  0 0 0 0 0 0
  0 0 0 0 0 0
]
b = 0 0 1 0 0 0

[hamiltonian]
h = q1*p2 - q2*p1 + ptheta*(p1^2 + p2^2 - q1^2 - q2^2)

[assertions]
proper_action = true
)";
}

std::string so3_text() {
  return R"(# Isotropic harmonic oscillator on T*R^3 with the diagonal SO(3) action;
# the moment map is the angular momentum q x p.

[system]
name = SO3-oscillator

[phase_space]
n = 3
coords = q1 q2 q3 p1 p2 p3

[algebra]
dim = 3
metric = [
  1 0 0
  0 1 0
  0 0 1
]
c = [
  1 2 3 1
  1 3 2 -1
  2 3 1 1
]

[generator 1]
A = [
  0 0 0 0 0 0
  0 0 -1 0 0 0
  0 1 0 0 0 0
  0 0 0 0 0 0
  0 0 0 0 0 -1
  0 0 0 0 1 0
]
b = 0 0 0 0 0 0

[generator 2]
A = [
  0 0 1 0 0 0
  0 0 0 0 0 0
  -1 0 0 0 0 0
  0 0 0 0 0 1
  0 0 0 0 0 0
  0 0 0 -1 0 0
]
b = 0 0 0 0 0 0

[generator 3]
A = [
  0 -1 0 0 0 0
  1 0 0 0 0 0
  0 0 0 0 0 0
  0 0 0 0 -1 0
  0 0 0 1 0 0
  0 0 0 0 0 0
]
b = 0 0 0 0 0 0

[hamiltonian]
h = (q1^2 + q2^2 + q3^2 + p1^2 + p2^2 + p3^2)/2

[assertions]
proper_action = true
)";
}

std::string trivial_text() {
  return R"(# Planar harmonic oscillator with no symmetry group: the slice is the
# whole space and the verdict reduces to plain definiteness at a critical
# point.

[system]
name = trivial-oscillator

[phase_space]
n = 2
coords = q1 q2 p1 p2

[algebra]
dim = 0

[hamiltonian]
h = (q1^2 + q2^2 + p1^2 + p2^2)/2

[assertions]
proper_action = true
)";
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

const std::vector<std::string>& builtin_system_names() {
  static const std::vector<std::string> names = {"EX16", "SO3-oscillator", "trivial-oscillator"};
  return names;
}

bool is_builtin_system(std::string_view name) {
  for (const auto& n : builtin_system_names())
    if (lower(n) == lower(name)) return true;
  return false;
}

std::string builtin_system_text(std::string_view name) {
  std::string key = lower(name);
  if (key == "ex16") return ex16_text();
  if (key == "so3-oscillator") return so3_text();
  if (key == "trivial-oscillator") return trivial_text();
  throw std::invalid_argument("unknown builtin system '" + std::string(name) + "'");
}

LoadedSystem builtin_system(std::string_view name) {
  return load_system_text(builtin_system_text(name), "<builtin:" + std::string(name) + ">");
}

}  // namespace symstab
