#pragma once

// Text formats: CSV tables, field dumps, blob configuration files and flat
// key=value run configurations.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "blobrd/error.hpp"
#include "blobrd/experiments.hpp"
#include "blobrd/grid.hpp"
#include "blobrd/kernels.hpp"

namespace blobrd
{

/// Full-precision scientific notation; infinities print as `inf`.
inline std::string format_double(double x)
{
  if (std::isinf(x))
  {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", x);
  return buf;
}

inline void write_table_csv(std::ostream &os, const ExperimentResult &r)
{
  for (std::size_t c = 0; c < r.columns.size(); ++c)
  {
    os << (c ? "," : "") << r.columns[c];
  }
  os << '\n';
  for (const auto &row : r.rows)
  {
    for (std::size_t c = 0; c < row.size(); ++c)
    {
      os << (c ? "," : "") << format_double(row[c]);
    }
    os << '\n';
  }
}

inline void write_metadata_csv(std::ostream &os, const std::map<std::string, std::string> &meta)
{
  os << "key,value\n";
  for (const auto &[k, v] : meta)
  {
    os << k << ',' << v << '\n';
  }
}

/// Header `i,j,k,x,y,z,value` (k and z dropped in 2-D), rows in storage order.
inline void write_field_csv(std::ostream &os, const ScalarField &f)
{
  const GridSpec &g = f.spec();
  const bool three = g.dim() == 3;
  os << (three ? "i,j,k,x,y,z,value\n" : "i,j,x,y,value\n");
  for (std::size_t n = 0; n < g.cell_count(); ++n)
  {
    const Index3 ijk = g.unravel(n);
    const Vec3 x = g.center(ijk);
    os << ijk[0] << ',' << ijk[1] << ',';
    if (three)
    {
      os << ijk[2] << ',';
    }
    os << format_double(x[0]) << ',' << format_double(x[1]) << ',';
    if (three)
    {
      os << format_double(x[2]) << ',';
    }
    os << format_double(f[n]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Solve report

struct SolveReport
{
  std::string experiment;
  int L = 0;
  std::size_t N = 0;
  std::string precond;
  int m = 0;
  int n = 0;
  int outer_iters = 0;
  std::int64_t total_cycles = 0;
  double final_residual = 0.0;
};

inline void write_solve_report(std::ostream &os, const std::vector<SolveReport> &rows)
{
  os << "experiment,L,N,precond,m,n,outer_iters,total_cycles,final_residual\n";
  for (const auto &r : rows)
  {
    os << r.experiment << ',' << r.L << ',' << r.N << ',' << r.precond << ',' << r.m << ','
       << r.n << ',' << r.outer_iters << ',' << r.total_cycles << ','
       << format_double(r.final_residual) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Blob configuration files
//
//   # d=3 h=1 kernel=4
//   x y z kappa          (kappa = inf for diffusion-limited; z ignored in 2-D)

struct BlobFile
{
  int dim = 3;
  double h = 1.0;
  KernelKind kernel = KernelKind::FourPoint;
  std::vector<Vec3> positions;
  std::vector<double> kappa;

  BlobSet to_blobs(const GridSpec &grid) const
  {
    if (grid.dim() != dim)
    {
      throw ConfigError("blob file dimension does not match the grid");
    }
    if (std::abs(grid.spacing() - h) > 1e-12 * h)
    {
      throw ConfigError("blob file spacing does not match the grid");
    }
    return BlobSet(grid, kernel, positions, kappa);
  }
};

inline void write_blob_file(std::ostream &os, int dim, double h, KernelKind kernel,
                            const std::vector<Vec3> &positions, const std::vector<double> &kappa)
{
  if (kappa.size() != positions.size())
  {
    throw ConfigError("one reaction rate per blob is required");
  }
  os << "# d=" << dim << " h=" << format_double(h) << " kernel=" << support_width(kernel) << '\n';
  for (std::size_t i = 0; i < positions.size(); ++i)
  {
    os << format_double(positions[i][0]) << ' ' << format_double(positions[i][1]) << ' '
       << format_double(dim == 3 ? positions[i][2] : 0.0) << ' ' << format_double(kappa[i])
       << '\n';
  }
}

inline void write_blob_file(std::ostream &os, const BlobSet &b)
{
  write_blob_file(os, b.grid().dim(), b.grid().spacing(), b.kernel(), b.positions(), b.kappa());
}

namespace detail
{

inline double parse_number(const std::string &tok, const std::string &where)
{
  if (tok == "inf" || tok == "+inf")
  {
    return kDiffusionLimited;
  }
  std::size_t used = 0;
  double v = 0.0;
  try
  {
    v = std::stod(tok, &used);
  }
  catch (const std::exception &)
  {
    used = 0;
  }
  if (used != tok.size() || tok.empty())
  {
    throw ConfigError(where + ": '" + tok + "' is not a number");
  }
  return v;
}

inline std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
  {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline BlobFile read_blob_file(std::istream &is, const std::string &name = "blob file")
{
  BlobFile out;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(is, line))
  {
    ++lineno;
    const std::string where = name + ":" + std::to_string(lineno);
    const std::string t = detail::trim(line);
    if (t.empty())
    {
      continue;
    }
    if (t[0] == '#')
    {
      if (header)
      {
        continue;
      }
      std::istringstream hs(t.substr(1));
      std::string kv;
      while (hs >> kv)
      {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
        {
          throw ConfigError(where + ": malformed header entry '" + kv + "'");
        }
        const std::string k = kv.substr(0, eq);
        const std::string v = kv.substr(eq + 1);
        if (k == "d")
        {
          out.dim = static_cast<int>(detail::parse_number(v, where));
          if (out.dim != 2 && out.dim != 3)
          {
            throw ConfigError(where + ": d must be 2 or 3");
          }
        }
        else if (k == "h")
        {
          out.h = detail::parse_number(v, where);
        }
        else if (k == "kernel")
        {
          out.kernel = kernel_from_width(static_cast<int>(detail::parse_number(v, where)));
        }
        else
        {
          throw ConfigError(where + ": unknown header key '" + k + "'");
        }
      }
      header = true;
      continue;
    }
    if (!header)
    {
      throw ConfigError(where + ": missing '# d=.. h=.. kernel=..' header");
    }
    std::istringstream ls(t);
    std::vector<std::string> tok;
    std::string s;
    while (ls >> s)
    {
      tok.push_back(s);
    }
    const std::size_t want = out.dim == 3 ? 4 : 3;
    if (tok.size() != want && tok.size() != 4)
    {
      throw ConfigError(where + ": expected 'x y z kappa'");
    }
    Vec3 q{0, 0, 0};
    q[0] = detail::parse_number(tok[0], where);
    q[1] = detail::parse_number(tok[1], where);
    if (out.dim == 3)
    {
      q[2] = detail::parse_number(tok[2], where);
    }
    out.positions.push_back(q);
    out.kappa.push_back(detail::parse_number(tok.back(), where));
  }
  if (!header)
  {
    throw ConfigError(name + ": empty blob file");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration: flat `key = value` lines, '#' comments. Later sources
// override earlier ones; every key remembers where it was set so errors can
// point at it.

class RunConfig
{
public:
  /// Parse a config stream; `name` labels diagnostics.
  void load(std::istream &is, const std::string &name)
  {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line))
    {
      ++lineno;
      const auto hash = line.find('#');
      const std::string t = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
      if (t.empty())
      {
        continue;
      }
      set_from(t, name + ":" + std::to_string(lineno));
    }
  }

  void load_file(const std::string &path)
  {
    std::ifstream in(path);
    if (!in)
    {
      throw ConfigError("cannot open config file '" + path + "'");
    }
    load(in, path);
  }

  /// Parse one `key=value` assignment.
  void set_from(const std::string &assignment, const std::string &origin)
  {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
    {
      throw ConfigError(origin + ": expected key=value, got '" + assignment + "'");
    }
    const std::string k = detail::trim(assignment.substr(0, eq));
    const std::string v = detail::trim(assignment.substr(eq + 1));
    if (k.empty())
    {
      throw ConfigError(origin + ": empty key");
    }
    values_[k] = {v, origin};
  }

  bool has(const std::string &k) const { return values_.count(k) != 0; }

  std::string get_string(const std::string &k, const std::string &fallback) const
  {
    const auto it = values_.find(k);
    return it == values_.end() ? fallback : it->second.value;
  }

  double get_double(const std::string &k, double fallback) const
  {
    const auto it = values_.find(k);
    if (it == values_.end())
    {
      return fallback;
    }
    return detail::parse_number(it->second.value, context(k));
  }

  int get_int(const std::string &k, int fallback) const
  {
    const double v = get_double(k, fallback);
    if (v != std::floor(v) || std::abs(v) > 1e9)
    {
      throw ConfigError(context(k) + ": expected an integer");
    }
    return static_cast<int>(v);
  }

  bool get_bool(const std::string &k, bool fallback) const
  {
    const std::string v = get_string(k, fallback ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes")
    {
      return true;
    }
    if (v == "false" || v == "0" || v == "no")
    {
      return false;
    }
    throw ConfigError(context(k) + ": expected true or false");
  }

  std::vector<double> get_list(const std::string &k, const std::vector<double> &fallback) const
  {
    const auto it = values_.find(k);
    if (it == values_.end())
    {
      return fallback;
    }
    std::vector<double> out;
    std::stringstream ss(it->second.value);
    std::string item;
    while (std::getline(ss, item, ','))
    {
      out.push_back(detail::parse_number(detail::trim(item), context(k)));
    }
    if (out.empty())
    {
      throw ConfigError(context(k) + ": empty list");
    }
    return out;
  }

  std::vector<int> get_int_list(const std::string &k, const std::vector<int> &fallback) const
  {
    std::vector<double> d(fallback.begin(), fallback.end());
    std::vector<int> out;
    for (double v : get_list(k, d))
    {
      if (v != std::floor(v))
      {
        throw ConfigError(context(k) + ": expected integers");
      }
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  /// Where key k was set, for diagnostics.
  std::string context(const std::string &k) const
  {
    const auto it = values_.find(k);
    return it == values_.end() ? "key '" + k + "'"
                               : it->second.origin + ": key '" + k + "'";
  }

  /// Throws on the first key outside `known`.
  void require_known(const std::set<std::string> &known) const
  {
    for (const auto &[k, v] : values_)
    {
      if (!known.count(k))
      {
        throw ConfigError(v.origin + ": unknown key '" + k + "'");
      }
    }
  }

  std::map<std::string, std::string> snapshot() const
  {
    std::map<std::string, std::string> out;
    for (const auto &[k, v] : values_)
    {
      out[k] = v.value;
    }
    return out;
  }

private:
  struct Entry
  {
    std::string value;
    std::string origin;
  };
  std::map<std::string, Entry> values_;
};

}  // namespace blobrd
