#include "dipl0/io.hpp"

#include "dipl0/kernels.hpp"

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

#include <jpeglib.h>
#include <png.h>

namespace dipl0 {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Interleaved 8-bit rows -> planar [0,1] tensor.
ImageTensor from_rows(const std::vector<std::vector<unsigned char>>& rows, int h, int w, int c) {
    ImageTensor img(h, w, c);
    for (int y = 0; y < h; ++y) {
        const unsigned char* row = rows[y].data();
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch)
                img.at(y, x, ch) = row[x * c + ch] / 255.0;
    }
    return img;
}

ImageTensor load_png(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png: out of memory");
    }
    std::vector<std::vector<unsigned char>> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: failed to decode " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: unsupported bit depth 16 in " + path);
    }
    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int h = static_cast<int>(png_get_image_height(png, info));
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int c = png_get_channels(png, info);
    if (c != 1 && c != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: unsupported channel layout in " + path);
    }

    rows.assign(h, std::vector<unsigned char>(static_cast<std::size_t>(w) * c));
    std::vector<png_bytep> row_ptrs(h);
    for (int y = 0; y < h; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_rows(rows, h, w, c);
}

struct JpegErr {
    jpeg_error_mgr pub;
    std::jmp_buf env;
};

void jpeg_error_trampoline(j_common_ptr cinfo) {
    std::longjmp(reinterpret_cast<JpegErr*>(cinfo->err)->env, 1);
}

ImageTensor load_jpeg(std::FILE* fp, const std::string& path) {
    jpeg_decompress_struct cinfo;
    JpegErr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_trampoline;
    if (setjmp(err.env)) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error("jpeg: failed to decode " + path);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const int h = static_cast<int>(cinfo.output_height);
    const int w = static_cast<int>(cinfo.output_width);
    const int c = cinfo.output_components;
    std::vector<std::vector<unsigned char>> rows(h,
        std::vector<unsigned char>(static_cast<std::size_t>(w) * c));
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = rows[cinfo.output_scanline].data();
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_rows(rows, h, w, c);
}

} // namespace

ImageTensor pad_to_alignment(const ImageTensor& img, int alignment) {
    if (alignment < 1) throw std::invalid_argument("pad_to_alignment: alignment must be >= 1");
    const int h = img.height(), w = img.width();
    const int ph = (h + alignment - 1) / alignment * alignment;
    const int pw = (w + alignment - 1) / alignment * alignment;
    if (ph == h && pw == w) return img;
    ImageTensor out(ph, pw, img.channels());
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y < ph; ++y) {
            const int sy = kernels::reflect_index(y, h);
            for (int x = 0; x < pw; ++x)
                out.at(y, x, c) = img.at(sy, kernels::reflect_index(x, w), c);
        }
    return out;
}

ImageTensor crop(const ImageTensor& img, int height, int width) {
    if (height < 1 || width < 1 || height > img.height() || width > img.width())
        throw std::invalid_argument("crop: bad crop size");
    if (height == img.height() && width == img.width()) return img;
    ImageTensor out(height, width, img.channels());
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) out.at(y, x, c) = img.at(y, x, c);
    return out;
}

LoadedImage load_image(const std::string& path, int alignment) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open " + path);
    unsigned char sig[8] = {};
    const std::size_t got = std::fread(sig, 1, 8, fp.get());
    std::rewind(fp.get());

    ImageTensor img;
    if (got >= 8 && png_sig_cmp(sig, 0, 8) == 0) {
        img = load_png(fp.get(), path);
    } else if (got >= 2 && sig[0] == 0xff && sig[1] == 0xd8) {
        img = load_jpeg(fp.get(), path);
    } else {
        throw std::runtime_error(path + " is neither PNG nor JPEG");
    }

    LoadedImage loaded;
    loaded.original_height = img.height();
    loaded.original_width = img.width();
    loaded.image = pad_to_alignment(img, alignment);
    return loaded;
}

unsigned char quantize_byte(double v) {
    if (!(v > 0.0)) v = 0.0; // also catches NaN
    if (v > 1.0) v = 1.0;
    return static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
}

ImageTensor quantized_view(const ImageTensor& img) {
    ImageTensor out(img.height(), img.width(), img.channels());
    for (std::size_t i = 0; i < img.size(); ++i)
        out.data()[i] = quantize_byte(img.data()[i]) / 255.0;
    return out;
}

void save_image(const ImageTensor& img, const std::string& path) {
    if (img.channels() != 1 && img.channels() != 3)
        throw std::invalid_argument("save_image: only 1- or 3-channel images can be written");
    if (!img.all_finite()) throw std::invalid_argument("save_image: non-finite values");

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png: out of memory");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: failed to write " + path);
    }
    png_init_io(png, fp.get());
    const int h = img.height(), w = img.width(), c = img.channels();
    png_set_IHDR(png, info, w, h, 8,
                 c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<unsigned char> row(static_cast<std::size_t>(w) * c);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) row[x * c + ch] = quantize_byte(img.at(y, x, ch));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace dipl0
