package cast

import "unsafe"

type T3 struct {
	N uint
}

type T4 struct {
	N uintptr
}

func Convert(v T3) *T4 {
	return (*T4)(unsafe.Pointer(&v))
}

func Back(p *T4) *T3 {
	return (*T3)(unsafe.Pointer(p))
}
