#include <stdio.h>
#include <stdlib.h>
#include "tucker_hooi.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        TkStatus st_ = (call);                                             \
        if (st_ != TK_STATUS_OK) {                                         \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_, tk_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    size_t shape[3] = {8, 7, 6};
    size_t ranks[3] = {2, 3, 2};
    TkTensor *x = NULL;
    CHECK(tk_gen_synthetic(3, shape, ranks, 0.0, 5, &x));

    TkSolveOptions opts = tk_solve_options_default();
    opts.algorithm = TK_ALGORITHM_GREEDY;
    TkSolution *sol = NULL;
    CHECK(tk_solve(x, ranks, &opts, &sol));

    double resid = tk_solution_relative_residual(sol);
    size_t rows = 0, cols = 0;
    CHECK(tk_solution_factor(sol, 1, &rows, &cols, NULL, 0));
    double *buf = malloc(rows * cols * sizeof(double));
    CHECK(tk_solution_factor(sol, 1, NULL, NULL, buf, rows * cols));

    if (tk_solve(NULL, ranks, &opts, &sol) != TK_STATUS_NULL_POINTER) return 2;

    printf("residual %.3e factor %zux%zu sweeps %zu\n", resid, rows, cols,
           tk_solution_sweeps(sol));
    int ok = resid < 1e-10 && rows == 7 && cols == 3;
    free(buf);
    tk_solution_free(sol);
    tk_tensor_free(x);
    return ok ? 0 : 3;
}
