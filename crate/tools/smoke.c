#include <stdio.h>
#include <assert.h>
#include "wildcat.h"

int main(void) {
    WildcatModel *model = NULL;
    assert(wildcat_model_new(0.5, 0.02, 0.5, 10.0, 1.0, &model) == WILDCAT_STATUS_OK);

    double r0 = 0.0;
    assert(wildcat_frontier_at_zero(model, &r0) == WILDCAT_STATUS_OK);

    WildcatSurface *surface = NULL;
    assert(wildcat_solve(model, 0.1, 0.005, 0.0, 0.0, &surface) == WILDCAT_STATUS_OK);

    double r_star, p_star, price;
    assert(wildcat_surface_frontier(surface, 0.05, &r_star, &p_star) == WILDCAT_STATUS_OK);
    assert(wildcat_surface_price_at(surface, 0.05, 2.0, &price) == WILDCAT_STATUS_OK);

    double times[3] = {0.0, 5.0, 10.0};
    double prices[3], reserves[3];
    unsigned char exhausted[3];
    assert(wildcat_sample_path(surface, 0.1, 2.5, 42, 0, 10.0, times, 3,
                               prices, reserves, NULL, NULL, exhausted) == WILDCAT_STATUS_OK);

    /* error path: bad alpha */
    WildcatModel *bad = NULL;
    assert(wildcat_model_new(2.0, 0.02, 0.5, 10.0, 1.0, &bad) == WILDCAT_STATUS_DOMAIN);
    char msg[128];
    wildcat_last_error(msg, sizeof msg);

    printf("C smoke: r0=%.4f r*(0.05)=%.4f p*(0.05)=%.4f p(0,)=%.4f p(10,)=%.4f err=\"%s\"\n",
           r0, r_star, p_star, prices[0], prices[2], msg);
    wildcat_surface_free(surface);
    wildcat_model_free(model);
    return 0;
}
