#include <math.h>
#include <stdio.h>
#include <string.h>

#include "fqc.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        FqcStatus s_ = (call);                                             \
        if (s_ != FQC_STATUS_OK) {                                         \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, fqc_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    FqcPointSet *chain = NULL;
    CHECK(fqc_pointset_fibonacci(100.0, &chain));
    size_t n = 0, dim = 0;
    CHECK(fqc_pointset_shape(chain, &n, &dim));
    double sep = 0.0;
    CHECK(fqc_pointset_min_separation(chain, &sep));
    if (dim != 1 || n < 140 || n > 150 || fabs(sep - 1.0) > 1e-12) {
        fprintf(stderr, "unexpected chain: n=%zu dim=%zu sep=%g\n", n, dim, sep);
        return 1;
    }

    FqcMeasure *comb = NULL;
    CHECK(fqc_measure_unit_comb(chain, &comb));
    double t = 0.0, re = 0.0, im = 0.0;
    CHECK(fqc_measure_transform_at(comb, &t, 1, &re, &im));
    if (fabs(re - (double)n) > 1e-9 || fabs(im) > 1e-9) {
        fprintf(stderr, "transform at 0 is %g%+gi\n", re, im);
        return 1;
    }

    char *json = NULL;
    CHECK(fqc_pointset_classify_json(chain, &json));
    if (strstr(json, "\"is_meyer\"") == NULL) {
        return 1;
    }
    fqc_string_free(json);

    if (fqc_pointset_min_separation(NULL, &sep) != FQC_STATUS_NULL_POINTER || fqc_last_error() == NULL) {
        return 1;
    }
    fqc_measure_free(comb);
    fqc_pointset_free(chain);
    printf("ok %s\n", fqc_version());
    return 0;
}
