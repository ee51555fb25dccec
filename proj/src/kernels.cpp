#include "pirdfl/kernels.hpp"

#include "pirdfl/parallel.hpp"

namespace pirdfl::kernels {

namespace {

// Two rows at a time to reuse the x loads; four lanes per row so gcc keeps
// the reduction vectorized without reassociating it differently per call.
inline void matvec_rows(const double* __restrict W, const double* __restrict x,
                        double* __restrict y, int r0, int r1, int cols) {
  int r = r0;
  for (; r + 2 <= r1; r += 2) {
    const double* w0 = W + static_cast<std::size_t>(r) * cols;
    const double* w1 = w0 + cols;
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    double b0 = 0, b1 = 0, b2 = 0, b3 = 0;
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      const double x0 = x[c], x1 = x[c + 1], x2 = x[c + 2], x3 = x[c + 3];
      a0 += w0[c] * x0;
      a1 += w0[c + 1] * x1;
      a2 += w0[c + 2] * x2;
      a3 += w0[c + 3] * x3;
      b0 += w1[c] * x0;
      b1 += w1[c + 1] * x1;
      b2 += w1[c + 2] * x2;
      b3 += w1[c + 3] * x3;
    }
    double s0 = (a0 + a1) + (a2 + a3);
    double s1 = (b0 + b1) + (b2 + b3);
    for (; c < cols; ++c) {
      s0 += w0[c] * x[c];
      s1 += w1[c] * x[c];
    }
    y[r] = s0;
    y[r + 1] = s1;
  }
  for (; r < r1; ++r) {
    const double* w = W + static_cast<std::size_t>(r) * cols;
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      a0 += w[c] * x[c];
      a1 += w[c + 1] * x[c + 1];
      a2 += w[c + 2] * x[c + 2];
      a3 += w[c + 3] * x[c + 3];
    }
    double s = (a0 + a1) + (a2 + a3);
    for (; c < cols; ++c) s += w[c] * x[c];
    y[r] = s;
  }
}

}  // namespace

void matvec_serial(const double* W, const double* x, double* y, int rows,
                   int cols) {
  matvec_rows(W, x, y, 0, rows, cols);
}

void matvec_omp(const double* W, const double* x, double* y, int rows,
                int cols) {
#ifdef _OPENMP
  const int nt = max_threads();
  if (nt > 1 && rows >= 2 * nt) {
#pragma omp parallel num_threads(nt)
    {
      const int tid = omp_get_thread_num();
      // even chunk boundaries keep the 2-row blocking intact per thread
      const int per = ((rows / 2 + nt - 1) / nt) * 2;
      const int r0 = tid * per;
      const int r1 = r0 + per < rows ? r0 + per : rows;
      if (r0 < r1) matvec_rows(W, x, y, r0, r1, cols);
    }
    return;
  }
#endif
  matvec_rows(W, x, y, 0, rows, cols);
}

void matvec(const double* W, const double* x, double* y, int rows, int cols) {
  if (static_cast<long>(rows) * cols >= 1 << 14)
    matvec_omp(W, x, y, rows, cols);
  else
    matvec_serial(W, x, y, rows, cols);
}

void matvec_acc_serial(const double* W, const double* x, double* y, int rows,
                       int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* w = W + static_cast<std::size_t>(r) * cols;
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      a0 += w[c] * x[c];
      a1 += w[c + 1] * x[c + 1];
      a2 += w[c + 2] * x[c + 2];
      a3 += w[c + 3] * x[c + 3];
    }
    double s = (a0 + a1) + (a2 + a3);
    for (; c < cols; ++c) s += w[c] * x[c];
    y[r] += s;
  }
}

void matvec_acc(const double* W, const double* x, double* y, int rows,
                int cols) {
  matvec_acc_serial(W, x, y, rows, cols);
}

void matvec_t_acc_serial(const double* W, const double* g, double* y, int rows,
                         int cols) {
  for (int r = 0; r < rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    const double* w = W + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) y[c] += gr * w[c];
  }
}

void matvec_t_acc(const double* W, const double* g, double* y, int rows,
                  int cols) {
  matvec_t_acc_serial(W, g, y, rows, cols);
}

void matmul_serial(const double* A, const double* B, double* C, int m, int k,
                   int n) {
  for (int i = 0; i < m; ++i) {
    double* c = C + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) c[j] = 0.0;
    const double* a = A + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double ap = a[p];
      const double* b = B + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) c[j] += ap * b[j];
    }
  }
}

void matmul_omp(const double* A, const double* B, double* C, int m, int k,
                int n) {
#ifdef _OPENMP
  const int nt = max_threads();
  if (nt > 1 && m >= nt) {
#pragma omp parallel for num_threads(nt) schedule(static)
    for (int i = 0; i < m; ++i)
      matmul_serial(A + static_cast<std::size_t>(i) * k, B,
                    C + static_cast<std::size_t>(i) * n, 1, k, n);
    return;
  }
#endif
  matmul_serial(A, B, C, m, k, n);
}

void matmul(const double* A, const double* B, double* C, int m, int k, int n) {
  if (static_cast<long>(m) * k * n >= 1 << 16)
    matmul_omp(A, B, C, m, k, n);
  else
    matmul_serial(A, B, C, m, k, n);
}

void outer_acc(const double* g, const double* x, double* G, int rows,
               int cols) {
  for (int r = 0; r < rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    double* row = G + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) row[c] += gr * x[c];
  }
}

double dot(const double* a, const double* b, int n) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += a[i] * b[i];
    a1 += a[i + 1] * b[i + 1];
    a2 += a[i + 2] * b[i + 2];
    a3 += a[i + 3] * b[i + 3];
  }
  double s = (a0 + a1) + (a2 + a3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace pirdfl::kernels
