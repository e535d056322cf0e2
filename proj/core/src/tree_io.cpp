#include "commutree/tree_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "commutree/errors.hpp"
#include "commutree/hexfloat.hpp"
#include "commutree/text_io.hpp"

namespace commutree {

namespace text {

bool LineReader::next(std::vector<std::string>& tokens) {
  std::string line;
  while (std::getline(is_, line)) {
    ++line_;
    tokens.clear();
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    if (!tokens.empty()) return true;
  }
  return false;
}

std::vector<std::string> LineReader::expect(const std::string& what) {
  std::vector<std::string> t;
  if (!next(t)) {
    ++line_;
    fail("unexpected end of file, expected " + what);
  }
  return t;
}

std::vector<std::string> LineReader::expect_keyword(const std::string& keyword,
                                                    std::size_t min_args) {
  auto t = expect("'" + keyword + "'");
  if (t.front() != keyword) fail("expected '" + keyword + "', found '" + t.front() + "'");
  if (t.size() < min_args + 1) fail("'" + keyword + "' needs " + std::to_string(min_args) + " values");
  t.erase(t.begin());
  return t;
}

double LineReader::to_double(const std::string& tok) const {
  auto v = parse_double(tok);
  if (!v) fail("bad number '" + tok + "'");
  return *v;
}

long long LineReader::to_int(const std::string& tok) const {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) fail("bad integer '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    fail("bad integer '" + tok + "'");
  }
}

Eigen::VectorXd LineReader::to_vector(const std::vector<std::string>& toks, std::size_t first,
                                      std::size_t count) const {
  if (toks.size() < first + count) fail("expected " + std::to_string(count) + " numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) v(static_cast<Eigen::Index>(i)) = to_double(toks[first + i]);
  return v;
}

std::string join_hex(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s.push_back(' ');
    s += format_hex(v(i));
  }
  return s;
}

}  // namespace text

namespace {

constexpr const char* kMagic = "commutree-tree";
constexpr int kVersion = 1;

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

void serialize(std::ostream& os, const PartitionTree& tree) {
  using text::join_hex;
  const int p = tree.p();
  os << kMagic << ' ' << kVersion << '\n';
  os << "p " << p << '\n';
  os << "m " << tree.m() << '\n';
  os << "scale " << join_hex(tree.transform().scale) << '\n';
  os << "offset " << join_hex(tree.transform().offset) << '\n';
  os << "theta " << tree.theta().num_vertices() << '\n';
  for (int k = 0; k < tree.theta().num_vertices(); ++k)
    os << join_hex(tree.theta().vertex(k)) << '\n';
  os << "phase1_iterations " << tree.phase1_iterations << '\n';
  if (const auto& r = tree.refinement) {
    os << "refinement eps_abs " << format_hex(r->eps_abs) << " eps_rel " << format_hex(r->eps_rel)
       << " rho_max " << format_hex(r->rho_max) << " pi_abs " << format_hex(r->pi_abs) << " pi_rel "
       << format_hex(r->pi_rel) << " min_edge " << format_hex(r->min_edge) << " iterations "
       << r->iterations << '\n';
  } else {
    os << "refinement none\n";
  }
  os << "nodes " << tree.size() << '\n';
  for (const auto& n : tree.nodes()) {
    os << "node " << n.id << ' ' << n.parent << ' ' << to_string(n.status) << ' '
       << (n.delta ? n.delta->to_string() : std::string("none")) << ' ' << format_hex(n.e_abs) << ' '
       << format_hex(n.e_rel) << ' ' << n.vertices.cols() << ' ' << join_hex(flatten(n.vertices))
       << '\n';
  }
  os << "end\n";
}

std::string serialize(const PartitionTree& tree) {
  std::ostringstream os;
  serialize(os, tree);
  return os.str();
}

PartitionTree deserialize(std::istream& is) {
  text::LineReader rd(is);
  std::vector<std::string> t;
  if (!rd.next(t)) throw FormatError(1, "empty tree file");
  if (t.size() != 2 || t[0] != kMagic) rd.fail("not a tree file");
  if (rd.to_int(t[1]) != kVersion) rd.fail("unsupported tree file version " + t[1]);

  const long long p = rd.to_int(rd.expect_keyword("p", 1)[0]);
  if (p < 1) rd.fail("p must be positive");
  const long long m = rd.to_int(rd.expect_keyword("m", 1)[0]);
  if (m < 0) rd.fail("m must be nonnegative");
  ScalingTransform tr;
  tr.scale = rd.to_vector(rd.expect_keyword("scale", p), 0, p);
  tr.offset = rd.to_vector(rd.expect_keyword("offset", p), 0, p);
  if ((tr.scale.array() <= 0).any()) rd.fail("scale factors must be positive");
  const long long nv = rd.to_int(rd.expect_keyword("theta", 1)[0]);
  if (nv < p + 1) rd.fail("theta needs at least p+1 vertices");
  Eigen::MatrixXd tv(p, nv);
  for (long long k = 0; k < nv; ++k) {
    auto row = rd.expect("theta vertex");
    if (static_cast<long long>(row.size()) != p) rd.fail("theta vertex needs p coordinates");
    tv.col(k) = rd.to_vector(row, 0, p);
  }
  Polytope theta;
  try {
    theta = Polytope(tv);
  } catch (const Error& e) {
    rd.fail(e.what());
  }
  PartitionTree tree(theta, static_cast<int>(m), tr);
  tree.phase1_iterations = static_cast<std::size_t>(rd.to_int(rd.expect_keyword("phase1_iterations", 1)[0]));

  auto ref = rd.expect_keyword("refinement", 1);
  if (ref[0] != "none") {
    if (ref.size() != 14) rd.fail("malformed refinement record");
    RefinementRecord r;
    for (std::size_t k = 0; k < ref.size(); k += 2) {
      const std::string& key = ref[k];
      const std::string& val = ref[k + 1];
      if (key == "eps_abs") r.eps_abs = rd.to_double(val);
      else if (key == "eps_rel") r.eps_rel = rd.to_double(val);
      else if (key == "rho_max") r.rho_max = rd.to_double(val);
      else if (key == "pi_abs") r.pi_abs = rd.to_double(val);
      else if (key == "pi_rel") r.pi_rel = rd.to_double(val);
      else if (key == "min_edge") r.min_edge = rd.to_double(val);
      else if (key == "iterations") r.iterations = static_cast<std::size_t>(rd.to_int(val));
      else rd.fail("unknown refinement key '" + key + "'");
    }
    tree.refinement = r;
  }

  const long long count = rd.to_int(rd.expect_keyword("nodes", 1)[0]);
  if (count < 1) rd.fail("a tree has at least the root node");
  std::vector<int> node_line(static_cast<std::size_t>(count), 0);
  for (long long id = 0; id < count; ++id) {
    auto f = rd.expect_keyword("node", 7);
    node_line[static_cast<std::size_t>(id)] = rd.line();
    if (rd.to_int(f[0]) != id) rd.fail("node ids must be consecutive from 0");
    const long long parent = rd.to_int(f[1]);
    auto status = parse_node_status(f[2]);
    if (!status) rd.fail("unknown node status '" + f[2] + "'");
    std::optional<Commutation> delta;
    if (f[3] != "none") {
      try {
        delta = Commutation::from_string(f[3]);
      } catch (const Error& e) {
        rd.fail(e.what());
      }
      if (delta->size() != m) rd.fail("commutation length differs from m");
    }
    const double e_abs = rd.to_double(f[4]);
    const double e_rel = rd.to_double(f[5]);
    const long long k = rd.to_int(f[6]);
    if (k < p + 1) rd.fail("a node region needs at least p+1 vertices");
    if (static_cast<long long>(f.size()) != 7 + k * p) rd.fail("vertex coordinate count mismatch");
    const Eigen::VectorXd flat = rd.to_vector(f, 7, static_cast<std::size_t>(k * p));
    Eigen::MatrixXd v = Eigen::Map<const Eigen::MatrixXd>(flat.data(), p, k);
    if (id == 0) {
      if (parent != -1) rd.fail("root must have parent -1");
      if (v != tree.node(0).vertices) rd.fail("root region differs from theta");
      tree.node(0).status = *status;
      tree.node(0).delta = delta;
      tree.node(0).e_abs = e_abs;
      tree.node(0).e_rel = e_rel;
      continue;
    }
    if (parent < 0 || parent >= id) rd.fail("parent must precede its child");
    const NodeId nid = tree.add_child(static_cast<NodeId>(parent), std::move(v), *status, delta);
    tree.node(nid).e_abs = e_abs;
    tree.node(nid).e_rel = e_rel;
  }
  auto tail = rd.expect("end");
  if (tail.size() != 1 || tail[0] != "end") rd.fail("expected 'end'");

  // Children must tile their parent.
  for (const auto& n : tree.nodes()) {
    if (n.children.empty()) continue;
    double sum = 0.0;
    double vol = 0.0;
    try {
      vol = node_volume(n);
      for (NodeId c : n.children) sum += node_volume(tree.node(c));
    } catch (const Error& e) {
      throw FormatError(node_line[static_cast<std::size_t>(n.id)], e.what());
    }
    if (std::fabs(sum - vol) > 1e-6 * vol)
      throw FormatError(node_line[static_cast<std::size_t>(n.id)],
                        "child volumes do not sum to the volume of node " + std::to_string(n.id));
  }
  return tree;
}

PartitionTree deserialize(const std::string& s) {
  std::istringstream is(s);
  return deserialize(is);
}

void save_tree(const std::string& path, const PartitionTree& tree) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  serialize(os, tree);
  if (!os) throw Error("failed writing '" + path + "'");
}

PartitionTree load_tree(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return deserialize(is);
}

}  // namespace commutree
