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

func Convert(t *T2) *T1 {
	return (*T1)(unsafe.Pointer(t))
}
