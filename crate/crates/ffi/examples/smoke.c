#include <stdio.h>
#include "breather.h"

int main(void) {
    KgbConfig cfg = kgb_config_default();
    cfg.decay_budget = 40.0;
    cfg.hessian = 0;
    KgbBreather *b = NULL;
    KgbStatus s = kgb_breather_new(1, 1.0, 0.25, 0.2, "st", &cfg, &b);
    if (s != KGB_STATUS_OK) {
        char msg[256];
        kgb_last_error(msg, sizeof msg);
        fprintf(stderr, "kgb_breather_new: %d %s\n", (int)s, msg);
        return 1;
    }
    double pw, dc;
    kgb_breather_residual(b, &pw, &dc);
    printf("kgb %s omega %.12f residual %.3e\n", kgb_version(), kgb_breather_omega(b), pw);
    s = kgb_breather_new(1, 1.0, 0.7, 0.1, "st", &cfg, &b);
    kgb_breather_free(b);
    return s == KGB_STATUS_GUARD ? 0 : 2;
}
