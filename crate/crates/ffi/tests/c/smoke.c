#include <math.h>
#include <stdio.h>
#include <string.h>

#include "colombeau.h"

int main(void) {
    ColombeauTestFunction *tf = NULL;
    if (colombeau_test_function_default(0, &tf) != COLOMBEAU_STATUS_OK) return 1;

    int32_t p = 1;
    double re = 0, im = 0;
    if (colombeau_oracle("CMUC", &p, NULL, tf, &re, &im) != COLOMBEAU_STATUS_OK) return 2;
    double psi0 = 0;
    colombeau_test_function_eval(tf, 0, 0.0, &psi0);
    if (fabs(re + 0.5 * psi0) > 1e-12 || im != 0.0) return 3;

    if (colombeau_oracle("NOPE", NULL, NULL, tf, &re, &im) != COLOMBEAU_STATUS_UNKNOWN_FORMULA) return 4;
    char msg[256];
    size_t needed = 0;
    if (colombeau_last_error(msg, sizeof msg, &needed) != COLOMBEAU_STATUS_OK) return 5;
    if (strstr(msg, "NOPE") == NULL) return 6;

    colombeau_test_function_free(tf);
    printf("ok %zu formulas\n", colombeau_formula_count());
    return 0;
}
