#include "commutree/program_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "commutree/errors.hpp"
#include "commutree/hexfloat.hpp"
#include "commutree/text_io.hpp"

namespace commutree {

namespace {

const char* cone_name(ConeKind k) {
  switch (k) {
    case ConeKind::Zero: return "zero";
    case ConeKind::NonnegOrthant: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
  }
  return "?";
}

void write_vector(std::ostream& os, const char* key, const Eigen::VectorXd& v) {
  os << key << ' ' << v.size();
  if (v.size()) os << ' ' << text::join_hex(v);
  os << '\n';
}

// Row-major flatten.
void write_matrix(std::ostream& os, const char* key, const Eigen::MatrixXd& m) {
  os << key << ' ' << m.rows() << ' ' << m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << format_hex(m(i, j));
  os << '\n';
}

void write_data(std::ostream& os, const ConicData& d) {
  os << "cone " << d.cone.factors().size();
  for (const auto& f : d.cone.factors()) os << ' ' << cone_name(f.kind) << ' ' << f.size;
  os << '\n';
  write_vector(os, "c", d.c);
  write_vector(os, "c_theta", d.c_theta);
  os << "c0 " << format_hex(d.c0) << '\n';
  write_matrix(os, "A_eq", d.A_eq);
  write_vector(os, "b_eq", d.b_eq);
  write_matrix(os, "B_eq", d.B_eq);
  write_matrix(os, "G", d.G);
  write_vector(os, "h", d.h);
  write_matrix(os, "H", d.H);
}

Eigen::VectorXd read_vector(text::LineReader& r, const char* key) {
  const auto t = r.expect_keyword(key, 1);
  const long long n = r.to_int(t[0]);
  if (n < 0 || t.size() != static_cast<std::size_t>(n) + 1) r.fail(std::string("bad length for '") + key + "'");
  return r.to_vector(t, 1, static_cast<std::size_t>(n));
}

Eigen::MatrixXd read_matrix(text::LineReader& r, const char* key) {
  const auto t = r.expect_keyword(key, 2);
  const long long rows = r.to_int(t[0]);
  const long long cols = r.to_int(t[1]);
  if (rows < 0 || cols < 0 || t.size() != static_cast<std::size_t>(rows * cols) + 2)
    r.fail(std::string("bad shape for '") + key + "'");
  Eigen::MatrixXd m(rows, cols);
  for (long long i = 0; i < rows; ++i)
    for (long long j = 0; j < cols; ++j)
      m(i, j) = r.to_double(t[static_cast<std::size_t>(2 + i * cols + j)]);
  return m;
}

ConicData read_data(text::LineReader& r) {
  ConicData d;
  const auto t = r.expect_keyword("cone", 1);
  const long long nf = r.to_int(t[0]);
  if (nf < 0 || t.size() != static_cast<std::size_t>(2 * nf + 1)) r.fail("bad cone specification");
  std::vector<ConeFactor> factors;
  for (long long i = 0; i < nf; ++i) {
    const std::string& k = t[static_cast<std::size_t>(1 + 2 * i)];
    ConeFactor f;
    if (k == "zero") f.kind = ConeKind::Zero;
    else if (k == "nonneg") f.kind = ConeKind::NonnegOrthant;
    else if (k == "soc") f.kind = ConeKind::SecondOrder;
    else r.fail("unknown cone kind '" + k + "'");
    f.size = static_cast<int>(r.to_int(t[static_cast<std::size_t>(2 + 2 * i)]));
    if (f.size < 1 || (f.kind == ConeKind::SecondOrder && f.size < 2)) r.fail("bad cone size");
    factors.push_back(f);
  }
  try {
    d.cone = ConeSpec(std::move(factors));
  } catch (const Error& e) {
    r.fail(e.what());
  }
  d.c = read_vector(r, "c");
  d.c_theta = read_vector(r, "c_theta");
  d.c0 = r.to_double(r.expect_keyword("c0", 1)[0]);
  d.A_eq = read_matrix(r, "A_eq");
  d.b_eq = read_vector(r, "b_eq");
  d.B_eq = read_matrix(r, "B_eq");
  d.G = read_matrix(r, "G");
  d.h = read_vector(r, "h");
  d.H = read_matrix(r, "H");
  const auto issues = d.check_dimensions();
  if (!issues.empty()) r.fail(issues.front());
  return d;
}

}  // namespace

std::optional<std::string> ProblemInstance::find_meta(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return std::nullopt;
}

void write_instance(std::ostream& os, const ParametricProgram& prog, const Polytope& theta,
                    const Metadata& meta) {
  if (!prog.table() && !prog.mixed())
    throw InvalidInput("program '" + prog.name() + "' has no serializable encoding");
  if (theta.dim() != prog.p()) throw InvalidInput("parameter set dimension differs from program p");
  os << "commutree-program 1\n";
  os << "name " << (prog.name().empty() ? "-" : prog.name()) << '\n';
  os << "dims " << prog.p() << ' ' << prog.n() << ' ' << prog.m() << '\n';
  os << "groups " << prog.groups().size() << '\n';
  for (const auto& g : prog.groups()) {
    os << "group " << g.bits.size();
    for (int b : g.bits) os << ' ' << b;
    os << '\n';
  }
  if (prog.mixed()) {
    const auto& enc = *prog.mixed();
    os << "encoding affine\n";
    write_data(os, enc.base);
    write_vector(os, "c_delta", enc.c_delta);
    write_matrix(os, "A_delta", enc.A_delta);
    write_matrix(os, "G_delta", enc.G_delta);
  } else {
    os << "encoding table " << prog.table()->size() << '\n';
    for (const auto& [delta, data] : *prog.table()) {
      os << "entry " << delta.to_string() << '\n';
      write_data(os, data);
    }
  }
  os << "theta " << theta.num_vertices() << '\n';
  for (int j = 0; j < theta.num_vertices(); ++j) os << "vertex " << text::join_hex(theta.vertex(j)) << '\n';
  os << "meta " << meta.size() << '\n';
  for (const auto& [k, v] : meta) os << k << ' ' << v << '\n';
  os << "end\n";
}

std::string write_instance(const ParametricProgram& prog, const Polytope& theta, const Metadata& meta) {
  std::ostringstream os;
  write_instance(os, prog, theta, meta);
  return os.str();
}

ProblemInstance read_instance(std::istream& is) {
  text::LineReader r(is);
  const auto head = r.expect("header");
  if (head.size() != 2 || head[0] != "commutree-program") r.fail("not a commutree program file");
  if (head[1] != "1") r.fail("unsupported program format version " + head[1]);
  auto name = r.expect_keyword("name", 1)[0];
  if (name == "-") name.clear();
  const auto dims = r.expect_keyword("dims", 3);
  const int p = static_cast<int>(r.to_int(dims[0]));
  const int n = static_cast<int>(r.to_int(dims[1]));
  const int m = static_cast<int>(r.to_int(dims[2]));
  if (p < 1 || n < 0 || m < 0) r.fail("bad dimensions");
  const long long ng = r.to_int(r.expect_keyword("groups", 1)[0]);
  if (ng < 0) r.fail("bad group count");
  std::vector<OneHotGroup> groups;
  for (long long g = 0; g < ng; ++g) {
    const auto t = r.expect_keyword("group", 1);
    const long long k = r.to_int(t[0]);
    if (k < 0 || t.size() != static_cast<std::size_t>(k) + 1) r.fail("bad group");
    OneHotGroup og;
    for (long long i = 0; i < k; ++i) og.bits.push_back(static_cast<int>(r.to_int(t[static_cast<std::size_t>(i + 1)])));
    groups.push_back(std::move(og));
  }

  ProblemInstance inst;
  const auto enc = r.expect_keyword("encoding", 1);
  try {
    if (enc[0] == "affine") {
      MixedEncoding me;
      me.base = read_data(r);
      me.c_delta = read_vector(r, "c_delta");
      me.A_delta = read_matrix(r, "A_delta");
      me.G_delta = read_matrix(r, "G_delta");
      inst.program = ParametricProgram::from_mixed(name, p, m, std::move(me), std::move(groups));
    } else if (enc[0] == "table") {
      if (enc.size() != 2) r.fail("table encoding needs an entry count");
      const long long count = r.to_int(enc[1]);
      ParametricProgram::Table table;
      for (long long e = 0; e < count; ++e) {
        const auto t = r.expect_keyword("entry", 1);
        Commutation delta = Commutation::from_string(t[0]);
        if (delta.size() != m) r.fail("entry commutation has wrong length");
        table.emplace(delta, read_data(r));
      }
      inst.program = ParametricProgram::from_table(name, p, m, std::move(table), std::move(groups));
    } else {
      r.fail("unknown encoding '" + enc[0] + "'");
    }
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    r.fail(e.what());
  }
  if (inst.program->p() != p || inst.program->n() != n) r.fail("declared dimensions do not match data");

  const long long nv = r.to_int(r.expect_keyword("theta", 1)[0]);
  if (nv < 1) r.fail("parameter set needs vertices");
  Eigen::MatrixXd v(p, nv);
  for (long long j = 0; j < nv; ++j) {
    const auto t = r.expect_keyword("vertex", static_cast<std::size_t>(p));
    if (t.size() != static_cast<std::size_t>(p)) r.fail("vertex has wrong dimension");
    v.col(j) = r.to_vector(t, 0, static_cast<std::size_t>(p));
  }
  inst.theta = Polytope(v);
  const long long nm = r.to_int(r.expect_keyword("meta", 1)[0]);
  for (long long i = 0; i < nm; ++i) {
    auto t = r.expect("metadata entry");
    std::string value;
    for (std::size_t k = 1; k < t.size(); ++k) value += (k > 1 ? " " : "") + t[k];
    inst.meta.emplace_back(t[0], value);
  }
  r.expect_keyword("end");
  return inst;
}

ProblemInstance read_instance(const std::string& text) {
  std::istringstream is(text);
  return read_instance(is);
}

void save_instance(const std::string& path, const ParametricProgram& prog, const Polytope& theta,
                   const Metadata& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_instance(os, prog, theta, meta);
  if (!os) throw Error("failed writing '" + path + "'");
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_instance(is);
}

}  // namespace commutree
