#include <stdio.h>
#include <stdlib.h>

#include "snell.h"

int main(void) {
    SnellBinomialParams params = {
        .steps = 4, .s0 = 100.0, .up = 1.1, .down = 0.9,
        .p_lo = 0.4, .p_hi = 0.6, .strike = 100.0, .payoff = SNELL_PAYOFF_PUT,
    };
    SnellModel *model = NULL;
    if (snell_model_binomial(&params, &model) != SNELL_STATUS_OK) {
        fprintf(stderr, "error: %s\n", snell_last_error_message());
        return 1;
    }
    double value = 0.0;
    snell_lower_value(model, &value);

    size_t len = 0;
    snell_tau_down_region(model, NULL, 0, &len);
    uint64_t *region = malloc(len * sizeof *region);
    snell_tau_down_region(model, region, len, &len);

    printf("lower value %.6f, robust stopping region of %zu nodes\n", value, len);
    free(region);
    snell_model_free(model);
    return 0;
}
