/*
 * Generates the baseline JPEG parser fixtures with libjpeg and dumps the
 * quantized luma coefficients that libjpeg itself decodes from each file.
 *
 *   cc -O2 -o mkfixtures tools/mkfixtures.c -ljpeg
 *   ./mkfixtures crates/core/tests/fixtures/jpeg
 *
 * Every fixture is written as NAME.jpg together with NAME.coef, the text
 * dump read back through jpeg_read_coefficients (no pixel decode).
 */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <math.h>
#include <jpeglib.h>

enum content { NOISE, GRADIENT, BLOBS, FLAT };
enum layout { GRAY, S444, S422, S420, S440 };

struct fixture {
    char name[64];
    int width, height, qf;
    enum layout layout;
    enum content content;
    int restart_rows;   /* restart interval in MCUs (0 = none) */
    int optimize;       /* optimized Huffman tables */
    int progressive;
    int flat_value;
};

static unsigned long long rng_state;

static unsigned next_u32(void) {
    rng_state = rng_state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (unsigned)(rng_state >> 33);
}

static int clamp255(double v) {
    if (v < 0) return 0;
    if (v > 255) return 255;
    return (int)(v + 0.5);
}

static void synth(const struct fixture *f, JSAMPLE *buf, int comps) {
    rng_state = (unsigned long long)f->qf * 7919ULL + (unsigned long long)f->width * 131ULL + f->height;
    for (int y = 0; y < f->height; y++) {
        for (int x = 0; x < f->width; x++) {
            for (int c = 0; c < comps; c++) {
                double v;
                switch (f->content) {
                case NOISE:
                    v = 128 + 60 * sin(0.3 * x + c) + (double)(next_u32() % 90) - 45;
                    break;
                case GRADIENT:
                    v = 20 + 200.0 * (x + y) / (f->width + f->height) + 40 * c + (double)(next_u32() % 9) - 4;
                    break;
                case BLOBS:
                    v = 128 + 90 * sin(0.21 * x) * cos(0.17 * y + c) + (double)(next_u32() % 31) - 15;
                    break;
                default:
                    v = f->flat_value;
                }
                buf[(y * f->width + x) * comps + c] = (JSAMPLE)clamp255(v);
            }
        }
    }
}

static int encode(const struct fixture *f, const char *path) {
    struct jpeg_compress_struct cinfo;
    struct jpeg_error_mgr jerr;
    int comps = f->layout == GRAY ? 1 : 3;
    FILE *out = fopen(path, "wb");
    if (!out) return -1;

    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, out);
    cinfo.image_width = f->width;
    cinfo.image_height = f->height;
    cinfo.input_components = comps;
    cinfo.in_color_space = comps == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, f->qf, TRUE);
    if (comps == 3) {
        int h = 1, v = 1;
        switch (f->layout) {
        case S422: h = 2; v = 1; break;
        case S420: h = 2; v = 2; break;
        case S440: h = 1; v = 2; break;
        default: break;
        }
        cinfo.comp_info[0].h_samp_factor = h;
        cinfo.comp_info[0].v_samp_factor = v;
        cinfo.comp_info[1].h_samp_factor = 1;
        cinfo.comp_info[1].v_samp_factor = 1;
        cinfo.comp_info[2].h_samp_factor = 1;
        cinfo.comp_info[2].v_samp_factor = 1;
    }
    cinfo.restart_in_rows = 0;
    cinfo.restart_interval = f->restart_rows;
    cinfo.optimize_coding = f->optimize ? TRUE : FALSE;
    cinfo.dct_method = JDCT_ISLOW;
    if (f->progressive) jpeg_simple_progression(&cinfo);

    JSAMPLE *buf = malloc((size_t)f->width * f->height * comps);
    synth(f, buf, comps);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = buf + (size_t)cinfo.next_scanline * f->width * comps;
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    fclose(out);
    free(buf);
    return 0;
}

static int dump(const char *jpg, const char *coef) {
    struct jpeg_decompress_struct cinfo;
    struct jpeg_error_mgr jerr;
    FILE *in = fopen(jpg, "rb");
    FILE *out = fopen(coef, "w");
    if (!in || !out) return -1;

    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, in);
    jpeg_read_header(&cinfo, TRUE);
    jvirt_barray_ptr *arrays = jpeg_read_coefficients(&cinfo);

    jpeg_component_info *y = &cinfo.comp_info[0];
    /* libjpeg pads each coefficient array to whole MCUs */
    int bw = (int)((y->width_in_blocks + y->h_samp_factor - 1) / y->h_samp_factor) * y->h_samp_factor;
    int bh = (int)((y->height_in_blocks + y->v_samp_factor - 1) / y->v_samp_factor) * y->v_samp_factor;
    if (cinfo.num_components == 1) {
        bw = (int)y->width_in_blocks;
        bh = (int)y->height_in_blocks;
    }

    fprintf(out, "# requant coefficient dump v1\n");
    fprintf(out, "# size %u %u\n", cinfo.image_width, cinfo.image_height);
    fprintf(out, "# blocks %d %d\n", bw, bh);
    fprintf(out, "# q");
    for (int i = 0; i < 64; i++) fprintf(out, " %u", y->quant_table->quantval[i]);
    fprintf(out, "\n");

    for (int by = 0; by < bh; by++) {
        JBLOCKARRAY row = (*cinfo.mem->access_virt_barray)((j_common_ptr)&cinfo, arrays[0], by, 1, FALSE);
        for (int bx = 0; bx < bw; bx++) {
            fprintf(out, "%d %d", bx, by);
            for (int i = 0; i < 64; i++) fprintf(out, " %d", row[0][bx][i]);
            fprintf(out, "\n");
        }
    }

    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    fclose(in);
    fclose(out);
    return 0;
}

static const int dims[][2] = {
    {16, 16}, {8, 8}, {17, 23}, {40, 32}, {33, 47}, {64, 48}, {24, 40}, {50, 18}, {31, 31},
};
static const char *layout_names[] = {"gray", "444", "422", "420", "440"};

int main(int argc, char **argv) {
    const char *dir = argc > 1 ? argv[1] : ".";
    struct fixture list[80];
    int n = 0;

    /* sweep QF 50..100 across layouts, sizes, restart intervals and table modes */
    for (int qf = 50; qf <= 100; qf++) {
        struct fixture *f = &list[n++];
        int i = qf - 50;
        memset(f, 0, sizeof *f);
        f->qf = qf;
        f->width = dims[i % 9][0];
        f->height = dims[i % 9][1];
        f->layout = (enum layout)(i % 5);
        f->content = (enum content)(i % 3);
        f->restart_rows = (i % 4 == 2) ? 1 : (i % 7 == 3 ? 2 : 0);
        f->optimize = i % 2;
        snprintf(f->name, sizeof f->name, "sweep_q%03d_%s_%dx%d", qf, layout_names[f->layout], f->width, f->height);
    }

    /* named fixtures */
    struct fixture *f;
    f = &list[n++]; memset(f, 0, sizeof *f);
    *f = (struct fixture){"gray_mid_8x8_q75", 8, 8, 75, GRAY, FLAT, 0, 0, 0, 128};
    f = &list[n++]; memset(f, 0, sizeof *f);
    *f = (struct fixture){"gray_mid_8x8_q30", 8, 8, 30, GRAY, FLAT, 0, 0, 0, 128};
    f = &list[n++]; memset(f, 0, sizeof *f);
    *f = (struct fixture){"photo_16x16_q75", 16, 16, 75, S420, BLOBS, 0, 0, 0, 0};
    f = &list[n++]; memset(f, 0, sizeof *f);
    *f = (struct fixture){"std_luma_q50", 32, 24, 50, S444, GRADIENT, 0, 0, 0, 0};
    f = &list[n++]; memset(f, 0, sizeof *f);
    *f = (struct fixture){"color_q80_restart", 48, 40, 80, S420, NOISE, 1, 1, 0, 0};
    f = &list[n++]; memset(f, 0, sizeof *f);
    *f = (struct fixture){"gray_q80", 40, 24, 80, GRAY, BLOBS, 0, 0, 0, 0};
    f = &list[n++]; memset(f, 0, sizeof *f);
    *f = (struct fixture){"low_q10", 24, 24, 10, S444, NOISE, 0, 0, 0, 0};

    for (int i = 0; i < n; i++) {
        char jpg[8300], coef[8300];
        snprintf(jpg, sizeof jpg, "%s/%s.jpg", dir, list[i].name);
        snprintf(coef, sizeof coef, "%s/%s.coef", dir, list[i].name);
        if (encode(&list[i], jpg) || dump(jpg, coef)) {
            fprintf(stderr, "failed: %s\n", list[i].name);
            return 1;
        }
    }

    /* progressive file for the rejection path, no dump */
    struct fixture prog = {"progressive_q80", 32, 32, 80, S420, BLOBS, 0, 0, 1, 0};
    char jpg[8300];
    snprintf(jpg, sizeof jpg, "%s/%s.jpg", dir, prog.name);
    if (encode(&prog, jpg)) return 1;

    printf("wrote %d fixtures\n", n);
    return 0;
}
