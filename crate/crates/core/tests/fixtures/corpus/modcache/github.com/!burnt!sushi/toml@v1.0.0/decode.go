package toml

import (
	"reflect"
	"unsafe"
)

func Valid(s string) bool {
	return len(s) > 0 && header(s).Len > 0
}

func header(s string) *reflect.StringHeader {
	return (*reflect.StringHeader)(unsafe.Pointer(&s))
}
