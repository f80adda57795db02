#include <stdio.h>
#include <string.h>

#include "valley_codes.h"

int main(int argc, char **argv) {
    if (argc != 2) {
        return 10;
    }
    VcCode *code = NULL;
    if (vc_code_load(argv[1], &code) != VC_STATUS_OK) {
        return 11;
    }
    if (vc_code_message_len(code) != 2 || vc_code_block_len(code) != 4) {
        return 12;
    }
    uint8_t msg[2] = {1, 0};
    uint8_t word[4];
    size_t len = 0;
    if (vc_code_encode(code, msg, 2, word, sizeof word, &len) != VC_STATUS_OK || len != 4) {
        return 13;
    }
    VcChannel ch = {VC_CHANNEL_KIND_BDC, 1e-12};
    uint8_t received[4];
    if (vc_transmit(ch, 7, 0, word, 4, received, sizeof received, &len) != VC_STATUS_OK || len != 4) {
        return 14;
    }
    uint8_t back[2];
    if (vc_code_decode(code, received, len, back, sizeof back, &len) != VC_STATUS_OK || memcmp(back, msg, 2) != 0) {
        return 15;
    }
    uint8_t bad[2] = {2, 0};
    if (vc_code_encode(code, bad, 2, word, sizeof word, &len) != VC_STATUS_INVALID_ARGUMENT) {
        return 16;
    }
    char err[128];
    if (vc_last_error(err, sizeof err) == 0) {
        return 17;
    }
    vc_code_free(code);
    puts("ok");
    return 0;
}
