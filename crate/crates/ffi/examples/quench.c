/* Quench an N = 100 battery from h = 0.5 to h = 2.0 and print W(t).
 *
 *   cargo build --release -p lmg-battery-ffi
 *   cc crates/ffi/examples/quench.c -Icrates/ffi/include \
 *      target/release/liblmg_battery_ffi.a -lm -lpthread -ldl -o quench
 */
#include <stdio.h>
#include <stdlib.h>

#include "lmg_battery.h"

int main(void) {
    LmgModel model = {.n = 100, .lambda = 1.0, .gamma = 0.0, .h = 0.5};
    LmgQuench *quench = NULL;
    if (lmg_quench_new(model, 2.0, 50.0, 11, &quench) != LMG_STATUS_OK) {
        fprintf(stderr, "error: %s\n", lmg_last_error());
        return 1;
    }
    size_t len = lmg_quench_len(quench);
    double *t = (double *)malloc(len * sizeof(double));
    double *w = (double *)malloc(len * sizeof(double));
    lmg_quench_times(quench, t, len);
    lmg_quench_work(quench, w, len);
    for (size_t i = 0; i < len; i++) {
        printf("%6.2f %.6f\n", t[i], w[i]);
    }
    double mean, variance;
    lmg_quench_long_time(quench, &mean, &variance);
    printf("<W> = %.6f, Var = %.6f (lmg-battery %s)\n", mean, variance, lmg_version());

    model.n = 0;
    LmgStatus bad = lmg_quench_new(model, 2.0, 50.0, 11, &quench);
    printf("N = 0 -> status %d: %s\n", bad, lmg_last_error());

    free(t);
    free(w);
    lmg_quench_free(quench);
    return 0;
}
