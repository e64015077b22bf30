#include "alphagp/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "alphagp/parallel.hpp"
#include "alphagp/parser.hpp"
#include "alphagp/stats.hpp"

namespace alphagp {

namespace {

constexpr double kDivGuard = 1e-12;
constexpr double kScaleGuard = 1e-12;

class Evaluator {
 public:
  Evaluator(const MarketPanel& panel, const Dsl& dsl)
      : panel_(panel), dsl_(dsl) {}

  Matrix Eval(const AlphaExpr& expr) {
    switch (expr.kind) {
      case NodeKind::Field:
        return FieldMatrix(expr.field_id);
      case NodeKind::Constant: {
        Matrix out(panel_.NumDates(), panel_.NumStocks(), expr.const_value);
        return out;
      }
      case NodeKind::Window:
        throw ExprError("window leaf evaluated as data");
      case NodeKind::Operator:
        return EvalOp(expr);
    }
    throw ExprError("unreachable node kind");
  }

 private:
  Matrix FieldMatrix(int field_id) {
    const std::string& name = dsl_.fields.at(field_id);
    const auto& panel_names = PanelFieldNames();
    for (std::size_t i = 0; i < panel_names.size(); ++i) {
      if (panel_names[i] == name) return panel_.fields[i];
    }
    throw EvalError(EvalError::Kind::MissingField,
                    "panel has no field '" + name + "'");
  }

  Matrix EvalOp(const AlphaExpr& expr) {
    const OperatorSpec& spec = dsl_.ops.At(expr.op_id);
    switch (spec.semantics) {
      case OpSemantics::Add:
      case OpSemantics::Sub:
      case OpSemantics::Mul:
      case OpSemantics::Div: {
        Matrix a = Eval(expr.children[0]);
        Matrix b = Eval(expr.children[1]);
        return Binary(spec.semantics, a, b);
      }
      case OpSemantics::Abs:
      case OpSemantics::Log:
      case OpSemantics::Sign:
      case OpSemantics::Neg: {
        Matrix a = Eval(expr.children[0]);
        return Unary(spec.semantics, a);
      }
      case OpSemantics::Rank:
        return CrossRank(Eval(expr.children[0]));
      case OpSemantics::Scale:
        return CrossScale(Eval(expr.children[0]));
      case OpSemantics::TsCorr:
      case OpSemantics::TsCov: {
        Matrix a = Eval(expr.children[0]);
        Matrix b = Eval(expr.children[1]);
        return Pairwise(spec.semantics, a, b, expr.children[2].window_days);
      }
      default: {
        Matrix a = Eval(expr.children[0]);
        return TimeSeries(spec.semantics, a, expr.children[1].window_days);
      }
    }
  }

  Matrix Binary(OpSemantics sem, const Matrix& a, const Matrix& b) {
    Matrix out(a.Rows(), a.Cols());
    for (int t = 0; t < a.Rows(); ++t) {
      for (int i = 0; i < a.Cols(); ++i) {
        double x = a.At(t, i), y = b.At(t, i);
        switch (sem) {
          case OpSemantics::Add: out.At(t, i) = x + y; break;
          case OpSemantics::Sub: out.At(t, i) = x - y; break;
          case OpSemantics::Mul: out.At(t, i) = x * y; break;
          case OpSemantics::Div:
            out.At(t, i) = (IsMissing(x) || IsMissing(y) ||
                            std::fabs(y) < kDivGuard)
                               ? Missing()
                               : x / y;
            break;
          default: break;
        }
      }
    }
    return out;
  }

  Matrix Unary(OpSemantics sem, const Matrix& a) {
    Matrix out(a.Rows(), a.Cols());
    for (int t = 0; t < a.Rows(); ++t) {
      for (int i = 0; i < a.Cols(); ++i) {
        double x = a.At(t, i);
        switch (sem) {
          case OpSemantics::Abs: out.At(t, i) = std::fabs(x); break;
          case OpSemantics::Neg: out.At(t, i) = -x; break;
          case OpSemantics::Log:
            out.At(t, i) = (IsMissing(x) || x <= 0.0) ? Missing() : std::log(x);
            break;
          case OpSemantics::Sign:
            out.At(t, i) = IsMissing(x)
                               ? Missing()
                               : static_cast<double>((x > 0.0) - (x < 0.0));
            break;
          default: break;
        }
      }
    }
    return out;
  }

  Matrix CrossRank(const Matrix& a) {
    Matrix out(a.Rows(), a.Cols());
    std::vector<double> values;
    std::vector<int> cols;
    for (int t = 0; t < a.Rows(); ++t) {
      values.clear();
      cols.clear();
      for (int i = 0; i < a.Cols(); ++i) {
        if (!IsMissing(a.At(t, i)) && panel_.InUniverse(t, i)) {
          values.push_back(a.At(t, i));
          cols.push_back(i);
        }
      }
      const int n = static_cast<int>(values.size());
      if (n == 0) continue;
      if (n == 1) {
        out.At(t, cols[0]) = 0.5;
        continue;
      }
      std::vector<double> ranks = AverageTieRanks(values);
      for (int k = 0; k < n; ++k) {
        out.At(t, cols[k]) = (ranks[k] - 1.0) / (n - 1);
      }
    }
    return out;
  }

  Matrix CrossScale(const Matrix& a) {
    Matrix out(a.Rows(), a.Cols());
    for (int t = 0; t < a.Rows(); ++t) {
      double sum = 0.0;
      for (int i = 0; i < a.Cols(); ++i) {
        double v = a.At(t, i);
        if (!IsMissing(v) && panel_.InUniverse(t, i)) sum += std::fabs(v);
      }
      if (sum < kScaleGuard) continue;
      for (int i = 0; i < a.Cols(); ++i) {
        double v = a.At(t, i);
        if (!IsMissing(v) && panel_.InUniverse(t, i)) out.At(t, i) = v / sum;
      }
    }
    return out;
  }

  Matrix TimeSeries(OpSemantics sem, const Matrix& a, int w) {
    Matrix out(a.Rows(), a.Cols());
    const int T = a.Rows();
    const int N = a.Cols();

    if (sem == OpSemantics::Delay || sem == OpSemantics::Delta) {
      for (int t = w; t < T; ++t) {
        for (int i = 0; i < N; ++i) {
          double past = a.At(t - w, i);
          if (IsMissing(past)) continue;
          if (sem == OpSemantics::Delay) {
            out.At(t, i) = past;
          } else {
            double cur = a.At(t, i);
            if (!IsMissing(cur)) out.At(t, i) = cur - past;
          }
        }
      }
      return out;
    }

    for (int i = 0; i < N; ++i) {
      for (int t = w - 1; t < T; ++t) {
        // Full-window operators: every day in [t - w + 1, t] must be
        // defined.
        bool complete = true;
        for (int k = 0; k < w; ++k) {
          if (IsMissing(a.At(t - k, i))) {
            complete = false;
            break;
          }
        }
        if (!complete) continue;
        out.At(t, i) = WindowValue(sem, a, t, i, w);
      }
    }
    return out;
  }

  double WindowValue(OpSemantics sem, const Matrix& a, int t, int i, int w) {
    switch (sem) {
      case OpSemantics::TsSum:
      case OpSemantics::TsMean: {
        double s = 0.0;
        for (int k = 0; k < w; ++k) s += a.At(t - k, i);
        return sem == OpSemantics::TsSum ? s : s / w;
      }
      case OpSemantics::TsStd: {
        double m = 0.0;
        for (int k = 0; k < w; ++k) m += a.At(t - k, i);
        m /= w;
        double ss = 0.0;
        for (int k = 0; k < w; ++k) {
          double d = a.At(t - k, i) - m;
          ss += d * d;
        }
        return std::sqrt(ss / (w - 1));
      }
      case OpSemantics::TsMin:
      case OpSemantics::TsMax: {
        double best = a.At(t, i);
        for (int k = 1; k < w; ++k) {
          double v = a.At(t - k, i);
          if (sem == OpSemantics::TsMin ? v < best : v > best) best = v;
        }
        return best;
      }
      case OpSemantics::TsRank: {
        double x = a.At(t, i);
        int less = 0, equal = 0;
        for (int k = 0; k < w; ++k) {
          double v = a.At(t - k, i);
          if (v < x) ++less;
          if (v == x) ++equal;
        }
        double rank = less + (equal + 1) / 2.0;
        return (rank - 1.0) / (w - 1);
      }
      case OpSemantics::TsArgMax:
      case OpSemantics::TsArgMin: {
        // Days since the extremum; ties resolve to the most recent day.
        int best_k = 0;
        double best = a.At(t, i);
        for (int k = 1; k < w; ++k) {
          double v = a.At(t - k, i);
          if (sem == OpSemantics::TsArgMax ? v > best : v < best) {
            best = v;
            best_k = k;
          }
        }
        return static_cast<double>(best_k);
      }
      case OpSemantics::DecayLinear: {
        double s = 0.0;
        for (int k = 0; k < w; ++k) s += (w - k) * a.At(t - k, i);
        return s / (w * (w + 1) / 2.0);
      }
      default:
        throw ExprError("unexpected time-series semantics");
    }
  }

  Matrix Pairwise(OpSemantics sem, const Matrix& a, const Matrix& b, int w) {
    Matrix out(a.Rows(), a.Cols());
    const int T = a.Rows();
    const int N = a.Cols();
    for (int i = 0; i < N; ++i) {
      for (int t = w - 1; t < T; ++t) {
        bool complete = true;
        double ma = 0.0, mb = 0.0;
        for (int k = 0; k < w; ++k) {
          double x = a.At(t - k, i), y = b.At(t - k, i);
          if (IsMissing(x) || IsMissing(y)) {
            complete = false;
            break;
          }
          ma += x;
          mb += y;
        }
        if (!complete) continue;
        ma /= w;
        mb /= w;
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (int k = 0; k < w; ++k) {
          double dx = a.At(t - k, i) - ma;
          double dy = b.At(t - k, i) - mb;
          sab += dx * dy;
          saa += dx * dx;
          sbb += dy * dy;
        }
        if (sem == OpSemantics::TsCov) {
          out.At(t, i) = sab / (w - 1);
        } else if (saa > 0.0 && sbb > 0.0) {
          double r = sab / std::sqrt(saa * sbb);
          out.At(t, i) = std::clamp(r, -1.0, 1.0);
        }
      }
    }
    return out;
  }

  const MarketPanel& panel_;
  const Dsl& dsl_;
};

}  // namespace

AlphaMatrix Evaluate(const AlphaExpr& expr, const MarketPanel& panel,
                     const Dsl& dsl) {
  ValidateExpr(expr, dsl);
  Evaluator evaluator(panel, dsl);
  Matrix values = evaluator.Eval(expr);
  for (int t = 0; t < values.Rows(); ++t) {
    for (int i = 0; i < values.Cols(); ++i) {
      double& v = values.At(t, i);
      if (!panel.InUniverse(t, i)) {
        v = Missing();
      } else if (std::isinf(v)) {
        throw EvalError(EvalError::Kind::Overflow,
                        "non-finite alpha value at " + panel.dates[t] + "/" +
                            panel.stocks[i]);
      }
    }
  }
  return {std::move(values), expr, panel.id};
}

std::vector<BatchItem> BatchEvaluate(std::span<const AlphaExpr> exprs,
                                     const MarketPanel& panel, const Dsl& dsl,
                                     int n_threads) {
  std::vector<BatchItem> out(exprs.size());
  ParallelFor(
      static_cast<int>(exprs.size()),
      [&](int i) {
        try {
          out[i].result = Evaluate(exprs[i], panel, dsl);
        } catch (const std::exception& e) {
          out[i].error = e.what();
        }
      },
      n_threads);
  return out;
}

void WriteAlphaCsv(const AlphaMatrix& alpha, const MarketPanel& panel,
                   std::ostream& out) {
  out << "date,stock_id,value\n";
  for (int t = 0; t < alpha.values.Rows(); ++t) {
    for (int i = 0; i < alpha.values.Cols(); ++i) {
      double v = alpha.values.At(t, i);
      if (IsMissing(v)) continue;
      out << panel.dates[t] << ',' << panel.stocks[i] << ','
          << FormatDouble(v) << '\n';
    }
  }
}

}  // namespace alphagp
