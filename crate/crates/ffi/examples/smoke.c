#include "bm_moment.h"
#include <stdio.h>
#include <string.h>

int main(void) {
    const char *json =
        "{\"schema_version\":1,\"name\":\"c_smoke\","
        "\"model\":{\"torus\":{\"d\":2,\"xi_index\":0},"
        "\"weights\":{\"a\":[[0.0,0.0],[1.0,0.0]]},"
        "\"leaf\":{\"vertices\":[[0.0],[1.0]]},"
        "\"geometry\":{\"collar\":{\"delta\":0.5}},\"cuts\":[]},"
        "\"eps_list\":[0.1],\"resolution\":{\"n_collar\":33,\"n_leaf\":3},"
        "\"checks\":[\"desing\"]}";
    BmScenario *s = bm_scenario_load_json(json);
    if (!s) { fprintf(stderr, "load failed\n"); return 1; }
    if (bm_scenario_validate(s) != BM_STATUS_OK) { return 2; }
    double a = 0.0;
    if (bm_scenario_a_eps(s, 0.1, &a) != BM_STATUS_OK || a <= 8.0) { return 3; }
    double q = 0.0;
    if (bm_desing_density(2, 0.1, 0.2, &q) != BM_STATUS_OK) { return 4; }
    if (q < 24.9 || q > 25.1) { return 5; }
    char *name = bm_scenario_name(s);
    int ok = name && strcmp(name, "c_smoke") == 0;
    bm_string_free(name);
    bm_scenario_free(s);
    printf("c smoke ok: a_eps=%.4f q=%.1f version=%s\n", a, q, bm_version());
    return ok ? 0 : 6;
}
