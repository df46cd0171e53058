#include <cstring>

#include <png.h>

#include "actionimg/errors.hpp"
#include "actionimg/mapping.hpp"

namespace actionimg {

void export_png(const ActionImage& img, const std::filesystem::path& path) {
    if (img.rows() < 1 || img.cols() < 1) throw DataError("cannot write empty image " + path.string());
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.cols());
    image.height = static_cast<png_uint_32>(img.rows());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.bytes().data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DataError("writing " + path.string() + ": " + msg);
    }
}

ActionImage import_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw DataError("reading " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    ActionImage out(static_cast<int>(image.height), static_cast<int>(image.width));
    if (!png_image_finish_read(&image, nullptr, out.bytes().data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DataError("decoding " + path.string() + ": " + msg);
    }
    return out;
}

}  // namespace actionimg
