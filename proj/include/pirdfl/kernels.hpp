#pragma once
#include <cstddef>

namespace pirdfl::kernels {

/// Dense kernels behind the network layers and the simulator hot loops.
/// Each kernel has a serial reference implementation and an OpenMP variant
/// that splits independent output elements across threads; per-element
/// arithmetic is identical, so both produce bit-identical results. The
/// *_serial versions stay as the test oracle and benchmark baseline.

/// y = W x. W is rows x cols, row-major.
void matvec_serial(const double* W, const double* x, double* y, int rows,
                   int cols);
void matvec_omp(const double* W, const double* x, double* y, int rows,
                int cols);
void matvec(const double* W, const double* x, double* y, int rows, int cols);

/// y += W x.
void matvec_acc_serial(const double* W, const double* x, double* y, int rows,
                       int cols);
void matvec_acc(const double* W, const double* x, double* y, int rows,
                int cols);

/// y += W^T g (accumulating input-gradient form). W is rows x cols.
void matvec_t_acc_serial(const double* W, const double* g, double* y, int rows,
                         int cols);
void matvec_t_acc(const double* W, const double* g, double* y, int rows,
                  int cols);

/// C = A B. A is m x k, B is k x n, all row-major.
void matmul_serial(const double* A, const double* B, double* C, int m, int k,
                   int n);
void matmul_omp(const double* A, const double* B, double* C, int m, int k,
                int n);
void matmul(const double* A, const double* B, double* C, int m, int k, int n);

/// G += g x^T (rank-1 weight-gradient accumulation). G is rows x cols.
void outer_acc(const double* g, const double* x, double* G, int rows,
               int cols);

double dot(const double* a, const double* b, int n);

}  // namespace pirdfl::kernels
