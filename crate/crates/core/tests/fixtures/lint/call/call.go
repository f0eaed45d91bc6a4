package conv

import (
	"reflect"
	"unsafe"
)

func newHeader() *reflect.SliceHeader {
	return new(reflect.SliceHeader)
}

func StringToBytes(s string) (b []byte) {
	sh := (*reflect.StringHeader)(unsafe.Pointer(&s))
	bh := newHeader()
	bh.Data = sh.Data
	bh.Len = sh.Len
	bh.Cap = sh.Len
	return *(*[]byte)(unsafe.Pointer(bh))
}
