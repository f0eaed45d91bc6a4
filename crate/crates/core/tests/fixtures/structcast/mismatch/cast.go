package cast

import "unsafe"

type T1 struct {
	A int
	B int64
}

type T2 struct {
	A int64
	B int64
}

func Convert(t *T1) *T2 {
	return (*T2)(unsafe.Pointer(t))
}
