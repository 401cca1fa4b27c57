#include <stdio.h>

#include "ipcopula.h"

static const char *UNIFORM =
    "{\"grid\": {\"points\": [\"-inf\", \"0\", \"1/2\", \"1\", \"+inf\"]},"
    " \"lower\": [\"0\", \"0\", \"1/2\", \"1\", \"1\"],"
    " \"upper\": [\"0\", \"0\", \"1/2\", \"1\", \"1\"]}";

int main(void) {
    IpcPBox *x = NULL;
    IpcBiPBox *b = NULL;
    int coherent = -1;
    if (ipc_pbox_from_json(UNIFORM, &x) != IPC_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", ipc_last_error_message());
        return 1;
    }
    if (ipc_natural_extension(x, x, &b) != IPC_STATUS_OK || ipc_coherence_check(b, &coherent) != IPC_STATUS_OK) {
        fprintf(stderr, "%s\n", ipc_last_error_message());
        return 1;
    }
    printf("coherent %d\n", coherent);
    ipc_bipbox_free(b);
    ipc_pbox_free(x);
    return 0;
}
