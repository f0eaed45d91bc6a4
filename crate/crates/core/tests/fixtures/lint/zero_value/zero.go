package conv

import (
	"reflect"
	"unsafe"
)

func Bytes(p uintptr, n int) []byte {
	var h reflect.SliceHeader
	h.Data = p
	h.Len = n
	h.Cap = n
	return *(*[]byte)(unsafe.Pointer(&h))
}
