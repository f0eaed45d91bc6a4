package fast

import (
	"reflect"
	"unsafe"
)

func Len(s string) int {
	return (*reflect.StringHeader)(unsafe.Pointer(&s)).Len
}
