#include <math.h>
#include <stdio.h>
#include "shubin.h"

int main(void) {
    ShubinSymbol *ho = NULL;
    if (shubin_symbol_from_json("{\"n\": 1, \"exact\": \"ho\"}", &ho) != SHUBIN_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", shubin_last_error_message());
        return 1;
    }
    ShubinComplex ev[3];
    if (shubin_oracle_eigenvalues(ho, 64, 3, ev) != SHUBIN_STATUS_OK) return 2;
    for (int j = 0; j < 3; j++)
        if (fabs(ev[j].re - (j + 1)) > 1e-10) return 3;
    ShubinComplex res;
    if (shubin_residue(NULL, &res) != SHUBIN_STATUS_INVALID_ARGUMENT) return 4;
    printf("%s ok\n", shubin_last_error_code());
    shubin_symbol_free(ho);
    return 0;
}
