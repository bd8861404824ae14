#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "whg/complex_matrix.hpp"
#include "whg/errors.hpp"
#include "whg/group.hpp"

namespace whg {

// Gates acting on a (2n+1)-qupit register with wires ordered
// (z, x_n..x_1, y_n..y_1).  Wire w holds base-p digit position 2n - w of
// the shared (z, x, y) index convention, so z is the most significant
// digit.
struct Gate {
  enum class Kind {
    QftZp,                   // QFT over Z_p on `target`
    QftZpZeroControlled,     // QFT on `target` iff `control` is |0>
    PkControlled,            // P_k on `target` when `control` is |k>, P_0 = I
    AdderV,                  // |u+v, v><u, v| on (target, control)
    AdderVNonzeroControlled  // AdderV applied iff `zctrl` is nonzero (Eq.-U coupling)
  };

  Kind kind;
  std::int64_t target = 0;
  std::int64_t control = -1;  // unused for QftZp
  std::int64_t zctrl = -1;    // only for AdderVNonzeroControlled

  static Gate qft(std::int64_t t) { return {Kind::QftZp, t, -1, -1}; }
  static Gate qft_zero_ctrl(std::int64_t c, std::int64_t t) { return {Kind::QftZpZeroControlled, t, c, -1}; }
  static Gate pk_ctrl(std::int64_t c, std::int64_t t) { return {Kind::PkControlled, t, c, -1}; }
  static Gate adder_v(std::int64_t c, std::int64_t t) { return {Kind::AdderV, t, c, -1}; }
  static Gate adder_v_nonzero_ctrl(std::int64_t z, std::int64_t c, std::int64_t t) {
    return {Kind::AdderVNonzeroControlled, t, c, z};
  }

  friend bool operator==(const Gate& a, const Gate& b) {
    return a.kind == b.kind && a.target == b.target && a.control == b.control && a.zctrl == b.zctrl;
  }
};

struct Circuit {
  GroupParams params;
  std::vector<Gate> gates;  // time order: gates[0] acts first
};

enum class WireLayout { Standard, SwapXYTestHook };

// Recursive construction from Appendix A: base case is the QFT over Z_p on
// the z wire; each level i appends the U-stage on (z, x_i, y_i) --
// zero-controlled QFT on x_i, QFT then P_k on y_i (their product is
// QFT^{(k)} on the k block), and the z!=0-controlled adder V.
// SwapXYTestHook deliberately swaps the x/y roles; the circuit-vs-dense
// check must reject it.
inline Circuit build_circuit(const GroupParams& gp, WireLayout layout = WireLayout::Standard) {
  Circuit c{gp, {}};
  c.gates.push_back(Gate::qft(0));
  for (std::int64_t i = 1; i <= gp.n; ++i) {
    std::int64_t wx = gp.n + 1 - i;       // wire of x_i
    std::int64_t wy = 2 * gp.n + 1 - i;   // wire of y_i
    if (layout == WireLayout::SwapXYTestHook) std::swap(wx, wy);
    c.gates.push_back(Gate::qft_zero_ctrl(0, wx));
    c.gates.push_back(Gate::qft(wy));
    c.gates.push_back(Gate::pk_ctrl(0, wy));
    c.gates.push_back(Gate::adder_v_nonzero_ctrl(0, wy, wx));
  }
  return c;
}

namespace detail {

inline std::int64_t digit_of(std::int64_t index, std::int64_t pos, std::int64_t p) {
  std::int64_t scale = 1;
  for (std::int64_t i = 0; i < pos; ++i) scale *= p;
  return (index / scale) % p;
}

inline std::int64_t with_digit(std::int64_t index, std::int64_t pos, std::int64_t p, std::int64_t v) {
  std::int64_t scale = 1;
  for (std::int64_t i = 0; i < pos; ++i) scale *= p;
  const std::int64_t old = (index / scale) % p;
  return index + (v - old) * scale;
}

}  // namespace detail

// Dense embedding of a single gate on num_wires qupits (wire w <-> digit
// position num_wires - 1 - w).
inline ComplexMatrix gate_dense(const Gate& g, std::int64_t p, std::int64_t num_wires) {
  std::int64_t dim = 1;
  for (std::int64_t i = 0; i < num_wires; ++i) {
    dim *= p;
    if (dim > kDenseStateCap) throw TooLarge();
  }
  const RootsOfUnity w(p);
  const double s = 1.0 / std::sqrt(static_cast<double>(p));
  const auto pos = [&](std::int64_t wire) { return num_wires - 1 - wire; };
  ComplexMatrix m(dim, dim);
  for (std::int64_t col = 0; col < dim; ++col) {
    switch (g.kind) {
      case Gate::Kind::QftZp:
      case Gate::Kind::QftZpZeroControlled: {
        if (g.kind == Gate::Kind::QftZpZeroControlled &&
            detail::digit_of(col, pos(g.control), p) != 0) {
          m.at(col, col) = 1.0;
          break;
        }
        const std::int64_t v = detail::digit_of(col, pos(g.target), p);
        for (std::int64_t v2 = 0; v2 < p; ++v2)
          m.at(detail::with_digit(col, pos(g.target), p, v2), col) = s * w[v2 * v];
        break;
      }
      case Gate::Kind::PkControlled: {
        const std::int64_t k = detail::digit_of(col, pos(g.control), p);
        if (k == 0) {
          m.at(col, col) = 1.0;
          break;
        }
        // P_k has its unit entries at (u, k*u); column digit v goes to row
        // digit k^{-1} v, realizing QFT^{(k)} = P_k * QFT.
        const std::int64_t v = detail::digit_of(col, pos(g.target), p);
        m.at(detail::with_digit(col, pos(g.target), p, mul_mod(inv_mod(k, p), v, p)), col) = 1.0;
        break;
      }
      case Gate::Kind::AdderV:
      case Gate::Kind::AdderVNonzeroControlled: {
        if (g.kind == Gate::Kind::AdderVNonzeroControlled &&
            detail::digit_of(col, pos(g.zctrl), p) == 0) {
          m.at(col, col) = 1.0;
          break;
        }
        const std::int64_t u = detail::digit_of(col, pos(g.target), p);
        const std::int64_t v = detail::digit_of(col, pos(g.control), p);
        m.at(detail::with_digit(col, pos(g.target), p, add_mod(u, v, p)), col) = 1.0;
        break;
      }
    }
  }
  return m;
}

// P_k permutation on C^p with entries at (u, k*u); P_0 = I.
inline ComplexMatrix pk_dense(std::int64_t p, Residue k) {
  if (mod_p(k, p) == 0) return ComplexMatrix::identity(p);
  ComplexMatrix m(p, p);
  for (std::int64_t u = 0; u < p; ++u) m.at(u, mul_mod(k, u, p)) = 1.0;
  return m;
}

// QFT^{(k)} = (1/sqrt p) sum omega^{kuv} |u><v|.
inline ComplexMatrix qft_k_dense(std::int64_t p, Residue k) {
  const RootsOfUnity w(p);
  const double s = 1.0 / std::sqrt(static_cast<double>(p));
  ComplexMatrix m(p, p);
  for (std::int64_t u = 0; u < p; ++u)
    for (std::int64_t v = 0; v < p; ++v) m.at(u, v) = s * w[mul_mod(k, mul_mod(u, v, p), p)];
  return m;
}

// Ordered product of the gate embeddings (gates[0] applied first).
inline ComplexMatrix circuit_unitary(const Circuit& c) {
  const std::int64_t dim = c.params.order();
  if (dim > kDenseStateCap) throw TooLarge();
  const std::int64_t wires = 2 * c.params.n + 1;
  ComplexMatrix u = ComplexMatrix::identity(dim);
  for (const auto& g : c.gates) u = mat_mul(gate_dense(g, c.params.p, wires), u);
  return u;
}

// --- gate-list dump: one gate per line `KIND wire[,wire[,wire]]`

inline std::string dump_gates(const Circuit& c) {
  std::string out;
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case Gate::Kind::QftZp:
        out += "QFT_ZP " + std::to_string(g.target);
        break;
      case Gate::Kind::QftZpZeroControlled:
        out += "QFT_ZP_ZERO_CTRL " + std::to_string(g.control) + "," + std::to_string(g.target);
        break;
      case Gate::Kind::PkControlled:
        out += "PK_CTRL " + std::to_string(g.control) + "," + std::to_string(g.target);
        break;
      case Gate::Kind::AdderV:
        out += "ADDER_V " + std::to_string(g.control) + "," + std::to_string(g.target);
        break;
      case Gate::Kind::AdderVNonzeroControlled:
        out += "ADDER_V_NONZERO_CTRL " + std::to_string(g.zctrl) + "," +
               std::to_string(g.control) + "," + std::to_string(g.target);
        break;
    }
    out += '\n';
  }
  return out;
}

inline std::vector<Gate> parse_gates(const std::string& text) {
  std::vector<Gate> gates;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw Error("gate line without wires: " + line);
    const std::string kind = line.substr(0, sp);
    std::vector<std::int64_t> wires;
    std::stringstream ws(line.substr(sp + 1));
    std::string tok;
    while (std::getline(ws, tok, ',')) wires.push_back(std::stoll(tok));
    if (kind == "QFT_ZP" && wires.size() == 1) {
      gates.push_back(Gate::qft(wires[0]));
    } else if (kind == "QFT_ZP_ZERO_CTRL" && wires.size() == 2) {
      gates.push_back(Gate::qft_zero_ctrl(wires[0], wires[1]));
    } else if (kind == "PK_CTRL" && wires.size() == 2) {
      gates.push_back(Gate::pk_ctrl(wires[0], wires[1]));
    } else if (kind == "ADDER_V" && wires.size() == 2) {
      gates.push_back(Gate::adder_v(wires[0], wires[1]));
    } else if (kind == "ADDER_V_NONZERO_CTRL" && wires.size() == 3) {
      gates.push_back(Gate::adder_v_nonzero_ctrl(wires[0], wires[1], wires[2]));
    } else {
      throw Error("unrecognized gate line: " + line);
    }
  }
  return gates;
}

}  // namespace whg
